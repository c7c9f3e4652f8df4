//! Numeric weight-shifting operators (lowering, xi, raising) and the
//! constructive section of the lowering operator: Fourier coefficients of
//! the distinguished preimage via regularized pairings against truncated
//! and Hejhal Poincare series, the regularized Petersson pairing, and the
//! mock-shadow assembly.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::{vec, vec::Vec};

use num_traits::Zero;

use crate::maass::{FourierExpansion, Growth, VProfile};
use crate::reglift::{regularized_pairing, PairingConfig, RegularizedResult};
use crate::series::{ConjScaled, DefiniteTheta, HejhalPoincare, ModularFn, TruncatedPoincare};
use crate::weilrep::{HalfInt, WeilRep};
use crate::{rat_f64, C64, Error, Rat, Result};

const TWO_PI: f64 = 2.0 * core::f64::consts::PI;

/// Finite-difference and assembly knobs.
#[derive(Debug, Clone)]
pub struct OperatorConfig {
    /// step for d/d tau-bar stencils (Richardson-extrapolated)
    pub fd_step: f64,
    /// step for d/ds differences
    pub s_step: f64,
    pub hejhal_cmax: i64,
    pub pairing: PairingConfig,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        OperatorConfig {
            fd_step: 1e-4,
            s_step: 1e-3,
            hejhal_cmax: 32,
            pairing: PairingConfig::default(),
        }
    }
}

/// Maass lowering L = -2 i v^2 d/d(tau-bar) by central differences with one
/// Richardson step; returns the value and an error estimate.
pub fn lowering_numeric(
    f: &mut dyn FnMut(C64) -> Result<Vec<C64>>,
    tau: C64,
    cfg: &OperatorConfig,
) -> Result<(Vec<C64>, f64)> {
    let dbar = |fv: &mut dyn FnMut(C64) -> Result<Vec<C64>>, h: f64| -> Result<Vec<C64>> {
        let fu_p = fv(tau + C64::new(h, 0.0))?;
        let fu_m = fv(tau - C64::new(h, 0.0))?;
        let fv_p = fv(tau + C64::new(0.0, h))?;
        let fv_m = fv(tau - C64::new(0.0, h))?;
        let dim = fu_p.len();
        let mut out = vec![C64::zero(); dim];
        for i in 0..dim {
            let du = (fu_p[i] - fu_m[i]) / (2.0 * h);
            let dv = (fv_p[i] - fv_m[i]) / (2.0 * h);
            out[i] = 0.5 * (du + C64::new(0.0, 1.0) * dv);
        }
        Ok(out)
    };
    let h = cfg.fd_step;
    let d1 = dbar(f, h)?;
    let d2 = dbar(f, 0.5 * h)?;
    let dim = d1.len();
    let factor = C64::new(0.0, -2.0 * tau.im * tau.im);
    let mut out = vec![C64::zero(); dim];
    let mut err = 0.0f64;
    for i in 0..dim {
        let rich = (4.0 * d2[i] - d1[i]) / 3.0;
        out[i] = factor * rich;
        err += (factor * (rich - d2[i])).norm() / 3.0;
    }
    Ok((out, err))
}

/// xi_k(F) = v^{k-2} conj(L F).
pub fn xi_operator(
    f: &mut dyn FnMut(C64) -> Result<Vec<C64>>,
    k: HalfInt,
    tau: C64,
    cfg: &OperatorConfig,
) -> Result<(Vec<C64>, f64)> {
    let (low, err) = lowering_numeric(f, tau, cfg)?;
    let scale = libm::pow(tau.im, k.as_f64() - 2.0);
    Ok((low.into_iter().map(|x| scale * x.conj()).collect(), scale * err))
}

/// Maass raising R_l(g) = 2 i dg/dtau + (l / v) g for holomorphic g.
pub fn raising_numeric(
    g: &mut dyn FnMut(C64) -> Result<Vec<C64>>,
    ell: i32,
    tau: C64,
    cfg: &OperatorConfig,
) -> Result<(Vec<C64>, f64)> {
    if ell == 0 {
        return Err(Error::BadWeight);
    }
    let dtau = |gv: &mut dyn FnMut(C64) -> Result<Vec<C64>>, h: f64| -> Result<Vec<C64>> {
        let fu_p = gv(tau + C64::new(h, 0.0))?;
        let fu_m = gv(tau - C64::new(h, 0.0))?;
        let fv_p = gv(tau + C64::new(0.0, h))?;
        let fv_m = gv(tau - C64::new(0.0, h))?;
        let dim = fu_p.len();
        let mut out = vec![C64::zero(); dim];
        for i in 0..dim {
            let du = (fu_p[i] - fu_m[i]) / (2.0 * h);
            let dv = (fv_p[i] - fv_m[i]) / (2.0 * h);
            out[i] = 0.5 * (du - C64::new(0.0, 1.0) * dv);
        }
        Ok(out)
    };
    let h = cfg.fd_step;
    let d1 = dtau(g, h)?;
    let d2 = dtau(g, 0.5 * h)?;
    let base = g(tau)?;
    let dim = d1.len();
    let mut out = vec![C64::zero(); dim];
    let mut err = 0.0;
    for i in 0..dim {
        let rich = (4.0 * d2[i] - d1[i]) / 3.0;
        out[i] = C64::new(0.0, 2.0) * rich + base[i] * (ell as f64 / tau.im);
        err += 2.0 * (rich - d2[i]).norm() / 3.0;
    }
    Ok((out, err))
}

/// Coefficientwise raising on a holomorphic expansion:
/// c(m) q^m -> (-4 pi m c(m) + l c(m) / v) q^m.
pub fn raising_expansion(g: &FourierExpansion, ell: i32) -> Result<FourierExpansion> {
    if ell == 0 {
        return Err(Error::BadWeight);
    }
    if !g.is_holomorphic() {
        return Err(Error::BadWeight);
    }
    let mut out = FourierExpansion::new(
        g.weight + HalfInt::int(2),
        g.dual,
        g.dim,
        Growth::Moderate,
    );
    for (&m, profs) in &g.coeffs {
        let mf = rat_f64(m);
        let new: Vec<VProfile> = profs
            .iter()
            .map(|p| {
                let c = p.constant_part();
                let mut np = VProfile::constant(c * (-2.0 * TWO_PI * mf));
                np = np.add(&VProfile::power(c * ell as f64, Rat::from_integer(-1)));
                np
            })
            .collect();
        out.set(m, new);
    }
    Ok(out)
}

/// One assembled Fourier coefficient of F = Lsharp(f).
#[derive(Debug, Clone)]
pub struct LSharpCoefficient {
    pub m: Rat,
    pub mu: usize,
    pub w: f64,
    pub value: C64,
    pub error: f64,
}

/// Supplied harmonic family data for weights where the Hejhal sum does not
/// converge (kappa <= 2): per (m, mu) either an expansion or None for F_m = 0.
pub type SuppliedFm<'a> = &'a dyn Fn(Rat, usize) -> Option<FourierExpansion>;

/// Fourier coefficients c_F(m, w)(phi_mu) of the distinguished preimage
/// F = Lsharp(f) via c_F(m, w) = - <P_{m,w,mu} - F_{m,mu}, f>^reg.
///
/// `f` must declare its constant-term profile. For kappa > 2 the F_m with
/// m <= 0 vanish and the Hejhal sum supplies m > 0; for kappa <= 2 the
/// caller must pass `supplied` data (or declare the spaces empty by passing
/// a closure returning None, recorded by the caller).
pub fn lsharp_coefficients(
    rep: &Arc<WeilRep>,
    f: &dyn ModularFn,
    m_list: &[Rat],
    mu: usize,
    w_list: &[f64],
    supplied: Option<SuppliedFm<'_>>,
    cfg: &OperatorConfig,
) -> Result<Vec<LSharpCoefficient>> {
    let kappa = f.weight() + HalfInt::int(2); // f has weight kappa - 2
    let k = HalfInt::int(2) - kappa; // Poincare weight
    if f.known_mode_profile(Rat::zero()).is_none() {
        return Err(Error::MissingConstantProfile);
    }
    if kappa.twice() <= 4 && supplied.is_none() {
        // M_{2-kappa} can be nonzero: basis data (possibly empty) required
        return Err(Error::MissingBasisData);
    }
    let mut out = Vec::new();
    for &m in m_list {
        let frac = m - m.floor();
        if frac != rep.disc.q_vals[mu] {
            for &w in w_list {
                out.push(LSharpCoefficient { m, mu, w, value: C64::zero(), error: 0.0 });
            }
            continue;
        }
        // <F_m, f> is w-independent: compute once
        let fm_pairing: Option<RegularizedResult> = if let Some(sup) = supplied {
            match sup(m, mu) {
                Some(exp) => {
                    let h = crate::series::QExpansionFn::new(exp);
                    Some(regularized_pairing(&h, f, &cfg.pairing)?)
                }
                None => None,
            }
        } else if k.as_f64() < 0.0 && m > Rat::zero() {
            let mut fm = HejhalPoincare::new(rep.clone(), k, m, mu, cfg.hejhal_cmax)?;
            fm.estimate_c0()?;
            Some(regularized_pairing(&fm, f, &cfg.pairing)?)
        } else {
            None // F_m = 0
        };
        for &w in w_list {
            let pm = TruncatedPoincare::new(rep.clone(), k, m, mu, w)?;
            let p_pair = regularized_pairing(&pm, f, &cfg.pairing)?;
            let (fv, fe) = match &fm_pairing {
                Some(r) => (r.value, r.quadrature_error),
                None => (C64::zero(), 0.0),
            };
            out.push(LSharpCoefficient {
                m,
                mu,
                w,
                value: fv - p_pair.value,
                error: fe + p_pair.quadrature_error,
            });
        }
    }
    Ok(out)
}

/// Regularized Petersson pairing <F, G>_Pet = <F, v^kappa conj(G)>^reg for a
/// holomorphic G of the same weight and representation as F.
pub fn petersson_regularized(
    f: &dyn ModularFn,
    g: &FourierExpansion,
    cfg: &PairingConfig,
) -> Result<RegularizedResult> {
    if !g.is_holomorphic() || g.weight.twice() != f.weight().twice() || g.dual != f.is_dual() {
        return Err(Error::RepMismatch);
    }
    let wrapper = ConjScaled::new(g.clone(), false);
    regularized_pairing(f, &wrapper, cfg)
}

/// Cuspidal holomorphic-projection pairings <F, h_i>^reg for a supplied cusp
/// basis; an empty basis means the projection step leaves F unchanged.
pub fn cusp_projection_pairings(
    f: &dyn ModularFn,
    cusp_basis: &[FourierExpansion],
    cfg: &PairingConfig,
) -> Result<Vec<C64>> {
    cusp_basis.iter().map(|h| petersson_regularized(f, h, cfg).map(|r| r.value)).collect()
}

/// Mock generating-series data on a k < 0 fixture: coefficients
/// <F_m, -v^k conj(f0)> and the w-dependent completion
/// c_M(m, w) = <P_{m,w} - F_m, -v^k conj(f0)>.
pub struct MockSeries {
    pub k: HalfInt,
    /// mock coefficients <F_m, f> per m
    pub coefficients: BTreeMap<Rat, C64>,
    /// completed coefficients at the requested heights: (m, w) -> value
    pub completed: BTreeMap<(Rat, u32), C64>,
    /// heights corresponding to the u32 index
    pub heights: Vec<f64>,
    pub error: f64,
}

/// Assemble the mock series attached to a supplied holomorphic f0 of
/// negative weight k on the trivial coset; f = -v^k conj(f0).
pub fn mock_series(
    rep: &Arc<WeilRep>,
    f0: &FourierExpansion,
    m_list: &[Rat],
    heights: &[f64],
    cfg: &OperatorConfig,
) -> Result<MockSeries> {
    let k = f0.weight;
    if k.as_f64() >= 0.0 {
        return Err(Error::BadWeight);
    }
    let f = ConjScaled::new(f0.clone(), true);
    let mu = 0usize;
    let mut coefficients = BTreeMap::new();
    let mut completed = BTreeMap::new();
    let mut error = 0.0f64;
    for &m in m_list {
        let fm_value = if m > Rat::zero() {
            let mut fm = HejhalPoincare::new(rep.clone(), k, m, mu, cfg.hejhal_cmax)?;
            fm.estimate_c0()?;
            let r = regularized_pairing(&fm, &f, &cfg.pairing)?;
            error += r.quadrature_error;
            r.value
        } else if m.is_zero() {
            C64::zero() // F_0 = 0 for k < 0
        } else {
            C64::zero()
        };
        coefficients.insert(m, fm_value);
        for (wi, &w) in heights.iter().enumerate() {
            let pm = TruncatedPoincare::new(rep.clone(), k, m, mu, w)?;
            let p = regularized_pairing(&pm, &f, &cfg.pairing)?;
            error += p.quadrature_error;
            completed.insert((m, wi as u32), p.value - fm_value);
        }
    }
    Ok(MockSeries { k, coefficients, completed, heights: heights.to_vec(), error })
}

impl MockSeries {
    /// Evaluate the completion M(tau) = sum_m c_M(m, v(tau)) q^m using the
    /// stored height grid index `wi` for the coefficient heights.
    pub fn eval_at_height(&self, wi: u32, tau: C64) -> C64 {
        let mut acc = C64::zero();
        for (&(m, wj), &c) in &self.completed {
            if wj != wi {
                continue;
            }
            let mf = rat_f64(m);
            acc += c * (C64::new(0.0, TWO_PI * mf) * tau).exp();
        }
        acc
    }
}

/// Partial sums of the Rankin-Selberg convolution
/// L(s, g, theta) = Gamma(s/2 + n - 1)/(4 pi)^{s/2+n-1}
///                  sum_{m > 0} (c_theta(m) . conj(c_g(m))) / m^{s/2+n-1},
/// diagnostic only (no continuation).
pub fn rankin_partial(
    g: &FourierExpansion,
    theta: &DefiniteTheta,
    s: C64,
    m_terms: usize,
) -> Result<C64> {
    let n = g.weight.as_f64();
    let expo = s * 0.5 + C64::new(n - 1.0, 0.0);
    let mut acc = C64::zero();
    let mut count = 0usize;
    for (&m, profs) in &g.coeffs {
        if m <= Rat::zero() {
            continue;
        }
        if count >= m_terms {
            break;
        }
        let ct = theta.coefficient(m);
        let mut pair = C64::zero();
        for (i, p) in profs.iter().enumerate() {
            pair += ct.get(i).copied().unwrap_or(0.0) * p.constant_part().conj();
        }
        let mf = rat_f64(m);
        acc += pair * (-expo * libm::log(mf)).exp();
        count += 1;
    }
    let lg = lgamma_complex(expo);
    let prefactor = (lg - expo * libm::log(4.0 * core::f64::consts::PI)).exp();
    Ok(prefactor * acc)
}

/// log Gamma for complex argument with Re > 0 (Lanczos).
fn lgamma_complex(z: C64) -> C64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let zm1 = z - C64::new(1.0, 0.0);
    let mut x = C64::new(COEF[0], 0.0);
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        x += c / (zm1 + C64::new(i as f64, 0.0));
    }
    let t = zm1 + C64::new(G + 0.5, 0.0);
    0.5 * libm::log(2.0 * core::f64::consts::PI) + (zm1 + 0.5) * t.ln() - t + x.ln()
}
