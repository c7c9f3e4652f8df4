//! Building-block series: Siegel theta, definite theta with coefficient
//! extraction, contraction to a boundary theta, truncated Poincare series,
//! Hejhal-Poincare harmonic Maass series, and real-analytic Eisenstein
//! series. Everything implements [`ModularFn`], the interface the
//! regularized-pairing engine consumes.
//!
//! Evaluation contract: `eval` is the honest value; `eval_peeled` is the
//! value minus the handle's declared Fourier modes, computed without
//! catastrophic cancellation so the engine can integrate it numerically even
//! where the full function is exponentially large.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::{vec, vec::Vec};

use num_traits::Zero;

use crate::lattice::{enumerate_coset_vectors, EvenLattice, MajorantPoint, Target, ENUM_CAP};
use crate::maass::{incomplete_gamma, kummer_m1_scaled, FourierExpansion, Growth, VProfile};
use crate::weilrep::{
    complete_to_sl2, cosets_above_height, HalfInt, MpElement, SchwartzVector, WeilRep,
};
use crate::{rat_f64, tree_sum, C64, Error, Rat, Result};

const TWO_PI: f64 = 2.0 * core::f64::consts::PI;

/// A vector-valued function on the upper half plane with declared asymptotic
/// Fourier data, as consumed by the pairing engine.
pub trait ModularFn: Sync {
    fn dim(&self) -> usize;
    fn weight(&self) -> HalfInt;
    fn is_dual(&self) -> bool;
    fn eval(&self, tau: C64) -> Result<Vec<C64>>;

    /// Value minus the declared modes (stable where eval would cancel badly).
    fn eval_peeled(&self, tau: C64) -> Result<Vec<C64>> {
        self.eval(tau)
    }

    /// True if eval_peeled is identically zero (fully declared expansions).
    fn peeled_is_zero(&self) -> bool {
        false
    }

    /// Modes subtracted by `eval_peeled`.
    fn declared_modes(&self) -> Vec<Rat> {
        Vec::new()
    }

    /// Profile of the mode at q^m when the handle can supply it, including
    /// exact zeros inside its resolution window. Modes outside the window
    /// return None and are covered by `trunc_bound`.
    fn known_mode_profile(&self, _m: Rat) -> Option<Vec<VProfile>> {
        None
    }

    /// Bound on the evaluation truncation error at tau.
    fn trunc_bound(&self, _tau: C64) -> f64 {
        0.0
    }

    /// u-positions of discontinuities at height v, within (-1/2, 1/2).
    fn breakpoints(&self, _v: f64) -> Vec<f64> {
        Vec::new()
    }

    /// Heights where the function has vertical jumps, kinks or window
    /// tangencies; v-quadratures split at these.
    fn v_breaks(&self) -> Vec<f64> {
        Vec::new()
    }

    /// True if the function vanishes identically on the part of the
    /// fundamental domain below height 1 (sharp vertical cutoffs).
    fn vanishes_below_one(&self) -> bool {
        false
    }
}

fn zeros(dim: usize) -> Vec<C64> {
    vec![C64::zero(); dim]
}

fn q_pow(m: f64, tau: C64) -> C64 {
    (C64::new(0.0, TWO_PI * m) * tau).exp()
}

fn sum_columns(terms: &[Vec<C64>], dim: usize) -> Vec<C64> {
    let mut out = zeros(dim);
    let mut col: Vec<C64> = Vec::with_capacity(terms.len());
    for (i, slot) in out.iter_mut().enumerate() {
        col.clear();
        col.extend(terms.iter().map(|t| t[i]));
        *slot = tree_sum(&col);
    }
    out
}

// ---------------------------------------------------------------------------
// truncated Poincare series
// ---------------------------------------------------------------------------

/// P_{m, w, mu}: the sharply cut seed sigma_w q^{-m} phi_mu averaged over
/// Gamma_infty \ Gamma with the displayed 1/4 normalization; the four lifts
/// of +-Id are folded into the symmetrized seed, one representative per
/// class {+-(c, d)}.
pub struct TruncatedPoincare {
    pub rep: Arc<WeilRep>,
    pub k: HalfInt,
    pub m: Rat,
    pub mu: usize,
    pub w: f64,
    seed: SchwartzVector,
    vanishes: bool,
}

impl TruncatedPoincare {
    pub fn new(rep: Arc<WeilRep>, k: HalfInt, m: Rat, mu: usize, w: f64) -> Result<Self> {
        if !rep.parity_ok(k) {
            return Err(Error::WeightParityMismatch);
        }
        if w <= 0.0 {
            return Err(Error::NonPositiveArgument);
        }
        let frac = m - m.floor();
        let vanishes = frac != rep.disc.q_vals[mu];
        if !vanishes {
            // T-invariance of the seed: e(-m + Q(mu)) must be 1
            let t = -m + rep.disc.q_vals[mu];
            if !t.is_integer() {
                return Err(Error::BadIndex);
            }
        }
        let seed = rep.symmetrized_seed(k, &SchwartzVector::basis(rep.dim(), mu, false))?;
        Ok(TruncatedPoincare { rep, k, m, mu, w, seed, vanishes })
    }

    pub fn w0(&self) -> f64 {
        self.w.max(1.0 / self.w)
    }

    fn sum_cosets(&self, tau: C64, peel: bool) -> Result<Vec<C64>> {
        let mf = rat_f64(self.m);
        let mut terms: Vec<Vec<C64>> = Vec::new();
        if peel {
            // (sigma_w(v) - 1) q^{-m} seed
            if tau.im < self.w {
                let q = q_pow(-mf, tau);
                terms.push(self.seed.coords.iter().map(|&c| -q * c).collect());
            }
        } else if tau.im >= self.w {
            let q = q_pow(-mf, tau);
            terms.push(self.seed.coords.iter().map(|&c| q * c).collect());
        }
        for g in cosets_above_height(tau, self.w) {
            if g.c() == 0 {
                continue; // identity class handled above
            }
            let gtau = g.act(tau);
            let factor = g.phi_pow_neg2k(self.k, tau) * q_pow(-mf, gtau);
            let rv = self.rep.apply_inverse(&g, &self.seed)?;
            terms.push(rv.coords.iter().map(|&c| factor * c).collect());
        }
        Ok(sum_columns(&terms, self.dim()))
    }
}

impl ModularFn for TruncatedPoincare {
    fn dim(&self) -> usize {
        self.rep.dim()
    }
    fn weight(&self) -> HalfInt {
        self.k
    }
    fn is_dual(&self) -> bool {
        false
    }

    fn eval(&self, tau: C64) -> Result<Vec<C64>> {
        if self.vanishes {
            return Ok(zeros(self.dim()));
        }
        self.sum_cosets(tau, false)
    }

    fn eval_peeled(&self, tau: C64) -> Result<Vec<C64>> {
        if self.vanishes {
            return Ok(zeros(self.dim()));
        }
        self.sum_cosets(tau, true)
    }

    fn declared_modes(&self) -> Vec<Rat> {
        if self.vanishes {
            Vec::new()
        } else {
            vec![-self.m]
        }
    }

    fn known_mode_profile(&self, m: Rat) -> Option<Vec<VProfile>> {
        if self.vanishes || m != -self.m {
            return None;
        }
        Some(self.seed.coords.iter().map(|&c| VProfile::constant(c)).collect())
    }

    fn breakpoints(&self, v: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let budget = v / self.w;
        let cmax = libm::floor(libm::sqrt(budget.max(0.0)) / v) as i64;
        for c in 1..=cmax {
            let rad2 = budget - (c as f64 * v) * (c as f64 * v);
            if rad2 < 0.0 {
                continue;
            }
            let s = libm::sqrt(rad2);
            let dspan = libm::ceil(0.5 * c as f64 + s) as i64;
            for d in -dspan..=dspan {
                for sign in [-1.0, 1.0] {
                    let u = (-d as f64 + sign * s) / c as f64;
                    if u > -0.5 && u < 0.5 {
                        out.push(u);
                    }
                }
            }
        }
        out
    }

    fn vanishes_below_one(&self) -> bool {
        // sigma_w kills the seed below w, and for w >= 2/sqrt(3) no coset of
        // a fundamental-domain point reaches height w; the grazing interval
        // [1, 2/sqrt(3)) touches only a measure-zero set
        self.vanishes || self.w >= 1.0
    }

    fn v_breaks(&self) -> Vec<f64> {
        // sigma jump at w and the square-root tangency heights 1/(c^2 w)
        // where the (c, .) activation windows close
        let mut out = alloc::vec![self.w, 1.0 / self.w];
        for c in 1..=12i64 {
            out.push(1.0 / (c as f64 * c as f64 * self.w));
        }
        out
    }
}

/// Component series P_{m,w,mu} for all cosets mu with Q(mu) = m mod 1; the
/// vector-valued P_{m,w}(phi) is their a_mu-weighted sum.
pub fn poincare_components(
    rep: &Arc<WeilRep>,
    k: HalfInt,
    m: Rat,
    w: f64,
) -> Result<Vec<TruncatedPoincare>> {
    let frac = m - m.floor();
    rep.disc
        .q_vals
        .iter()
        .enumerate()
        .filter(|(_, &q)| q == frac)
        .map(|(mu, _)| TruncatedPoincare::new(rep.clone(), k, m, mu, w))
        .collect()
}

// ---------------------------------------------------------------------------
// Hejhal-Poincare series (k < 0)
// ---------------------------------------------------------------------------

/// F_{m, mu} of negative weight k: the absolutely convergent coset sum with
/// seed v^{1-k} e^{-2 pi m v} M(1, 2-k, 4 pi m v) e^{-2 pi i m u} phi_mu and
/// prefactor (4 pi m)^{1-k} / (4 Gamma(2-k)); the four lifts of +-Id are
/// folded into the symmetrized seed. Truncated at c <= cmax with a reported
/// tail bound ~ cmax^{2k}.
pub struct HejhalPoincare {
    pub rep: Arc<WeilRep>,
    pub k: HalfInt,
    pub m: Rat,
    pub mu: usize,
    pub cmax: i64,
    seed: SchwartzVector,
    prefactor: f64,
    /// (c, d, a, b, rho(gamma)^{-1} seed) for the window around |u| <= 1/2.
    pairs: Vec<(i64, i64, i64, i64, Vec<C64>)>,
    /// estimated constant coefficient (set by estimate_c0)
    pub c0_estimate: Vec<C64>,
    vanishes: bool,
}

impl HejhalPoincare {
    pub fn new(rep: Arc<WeilRep>, k: HalfInt, m: Rat, mu: usize, cmax: i64) -> Result<Self> {
        if k.as_f64() >= 0.0 {
            return Err(Error::NonNegativeWeight);
        }
        if !rep.parity_ok(k) {
            return Err(Error::WeightParityMismatch);
        }
        if m <= Rat::zero() {
            return Err(Error::BadIndex);
        }
        let frac = m - m.floor();
        let vanishes = frac != rep.disc.q_vals[mu];
        let seed = rep.symmetrized_seed(k, &SchwartzVector::basis(rep.dim(), mu, false))?;
        let kf = k.as_f64();
        let mf = rat_f64(m);
        let prefactor = libm::exp(
            (1.0 - kf) * libm::log(4.0 * core::f64::consts::PI * mf) - libm::lgamma(2.0 - kf),
        );
        // collective budget for the dropped |d| tail at each c: terms decay
        // like pref v^{1-k} |c tau + d|^{k-2}, so sum_{|z| > R} ~ R^{k-1}
        let d_budget = 2e-4;
        let rcut = libm::pow(
            (1.0 - kf) * d_budget / (2.0 * prefactor),
            1.0 / (kf - 1.0),
        )
        .max(8.0);
        let mut pairs = Vec::new();
        if !vanishes {
            for c in 1..=cmax {
                let dspan = libm::ceil(c as f64 * 0.5 + rcut) as i64;
                for d in -dspan..=dspan {
                    if num_integer::gcd(c, d) != 1 {
                        continue;
                    }
                    let (a, b) = complete_to_sl2(c, d);
                    let g = MpElement { m: [[a, b], [c, d]], branch: false };
                    let rv = rep.apply_inverse(&g, &seed)?;
                    pairs.push((c, d, a, b, rv.coords));
                }
            }
        }
        Ok(HejhalPoincare {
            rep,
            k,
            m,
            mu,
            cmax,
            seed,
            prefactor,
            pairs,
            c0_estimate: Vec::new(),
            vanishes,
        })
    }

    /// Fit the constant coefficient from the pole-free 0-mode at large
    /// heights (model: constant + e^{-2 pi v} transient).
    pub fn estimate_c0(&mut self) -> Result<()> {
        if self.vanishes {
            self.c0_estimate = zeros(self.dim());
            return Ok(());
        }
        self.c0_estimate = Vec::new();
        let heights = [6.0, 8.0, 10.0];
        let nodes = 32usize;
        let mut samples: Vec<Vec<C64>> = Vec::new();
        for &v in &heights {
            let mut acc = zeros(self.dim());
            for j in 0..nodes {
                let u = -0.5 + (j as f64 + 0.5) / nodes as f64;
                let val = self.sum_at(C64::new(u, v), true)?;
                for i in 0..self.dim() {
                    acc[i] += val[i];
                }
            }
            samples.push(acc.iter().map(|&x| x / nodes as f64).collect());
        }
        let w: Vec<f64> = heights.iter().map(|&v| libm::exp(-TWO_PI * v)).collect();
        let n = heights.len() as f64;
        let sw: f64 = w.iter().sum();
        let sww: f64 = w.iter().map(|x| x * x).sum();
        let det = n * sww - sw * sw;
        let mut c0 = zeros(self.dim());
        for i in 0..self.dim() {
            let sy: C64 = samples.iter().map(|s| s[i]).sum();
            let swy: C64 = samples.iter().zip(&w).map(|(s, &wj)| s[i] * wj).sum();
            c0[i] = (sy * sww - swy * sw) / det;
        }
        self.c0_estimate = c0;
        Ok(())
    }

    /// s(u, v) = v^{1-k} e^{-2 pi m v} M(1, 2-k, 4 pi m v) e^{-2 pi i m u}.
    fn seed_scalar(&self, u: f64, v: f64) -> Result<C64> {
        let kf = self.k.as_f64();
        let mf = rat_f64(self.m);
        let y = 4.0 * core::f64::consts::PI * mf * v;
        let scaled = kummer_m1_scaled(2.0 - kf, y)?;
        let mag = libm::pow(v, 1.0 - kf) * libm::exp(TWO_PI * mf * v) * scaled;
        let phase = (C64::new(0.0, -TWO_PI * mf * u)).exp();
        Ok(mag * phase)
    }

    /// Identity-class term minus its pole: the exact closed form
    /// -e^{-2 pi i m u} e^{2 pi m v} Gamma(1-k, 4 pi m v)/Gamma(1-k),
    /// which is the nonholomorphic Gamma-tail of the seed.
    fn identity_peeled_scalar(&self, u: f64, v: f64) -> Result<C64> {
        let kf = self.k.as_f64();
        let mf = rat_f64(self.m);
        let y = 4.0 * core::f64::consts::PI * mf * v;
        let g = incomplete_gamma(1.0 - kf, y)? / libm::tgamma(1.0 - kf);
        let phase = (C64::new(0.0, -TWO_PI * mf * u)).exp();
        Ok(-libm::exp(TWO_PI * mf * v) * g * phase)
    }

    fn sum_at(&self, tau: C64, peel: bool) -> Result<Vec<C64>> {
        if self.vanishes {
            return Ok(zeros(self.dim()));
        }
        // fold u into [-1/2, 1/2]: F(tau) = rho(T)^n F(tau - n)
        let n_shift = libm::round(tau.re) as i64;
        let tau0 = C64::new(tau.re - n_shift as f64, tau.im);
        let ident = if peel {
            self.identity_peeled_scalar(tau0.re, tau0.im)?
        } else {
            self.prefactor * self.seed_scalar(tau0.re, tau0.im)?
        };
        let mut out: Vec<C64> = self.seed.coords.iter().map(|&c| ident * c).collect();
        // the stored pair list is tau-independent, so the truncated sum stays
        // smooth in tau (no per-point radius cut)
        for (c, d, a, b, rv) in &self.pairs {
            let den = C64::new(*c as f64, 0.0) * tau0 + C64::new(*d as f64, 0.0);
            let num = C64::new(*a as f64, 0.0) * tau0 + C64::new(*b as f64, 0.0);
            let gtau = num / den;
            let g = MpElement { m: [[*a, *b], [*c, *d]], branch: false };
            let factor = g.phi_pow_neg2k(self.k, tau0)
                * self.prefactor
                * self.seed_scalar(gtau.re, gtau.im)?;
            for (slot, &x) in out.iter_mut().zip(rv) {
                *slot += factor * x;
            }
        }
        if peel && !self.c0_estimate.is_empty() {
            for i in 0..self.dim() {
                out[i] -= self.c0_estimate[i];
            }
        }
        if n_shift != 0 {
            let shifted = self
                .rep
                .apply(&MpElement::t_pow(n_shift), &SchwartzVector { coords: out, dual: false })?;
            out = shifted.coords;
        }
        Ok(out)
    }

    /// Rigorous absolute-convergence bound for the dropped cosets: the terms
    /// are O(pref v^{1-k} |c tau + d|^{k-2}), so the c > cmax tail is
    /// O(cmax^k) after summing the d-lines; the v-powers cancel. The dropped
    /// |d|-window budget is added on top.
    pub fn tail_bound(&self, tau: C64) -> f64 {
        let kf = self.k.as_f64();
        let mf = rat_f64(self.m);
        let v = tau.im.max(0.5);
        // sum_d |c tau + d|^{k-2} <= (c v)^{k-1} B, B = sqrt(pi) G((1-k)/2)/G((2-k)/2)
        let bconst = libm::sqrt(core::f64::consts::PI)
            * libm::exp(libm::lgamma((1.0 - kf) / 2.0) - libm::lgamma((2.0 - kf) / 2.0));
        let c = self.cmax as f64;
        let csum = libm::pow(c, kf) / (-kf) + libm::pow(c, kf - 1.0);
        let seed_sup = libm::exp(TWO_PI * mf / (c * c * v).max(0.25)) * 1.3;
        2.0 * self.prefactor * seed_sup * bconst * csum + 2e-4 * (1.0 + libm::pow(v, -2.0))
    }
}

impl ModularFn for HejhalPoincare {
    fn dim(&self) -> usize {
        self.rep.dim()
    }
    fn weight(&self) -> HalfInt {
        self.k
    }
    fn is_dual(&self) -> bool {
        false
    }
    fn eval(&self, tau: C64) -> Result<Vec<C64>> {
        self.sum_at(tau, false)
    }
    fn eval_peeled(&self, tau: C64) -> Result<Vec<C64>> {
        self.sum_at(tau, true)
    }
    fn declared_modes(&self) -> Vec<Rat> {
        if self.vanishes {
            Vec::new()
        } else if self.c0_estimate.is_empty() {
            vec![-self.m]
        } else {
            vec![-self.m, Rat::zero()]
        }
    }
    fn known_mode_profile(&self, m: Rat) -> Option<Vec<VProfile>> {
        if self.vanishes {
            return None;
        }
        if m == -self.m {
            Some(self.seed.coords.iter().map(|&c| VProfile::constant(c)).collect())
        } else if m.is_zero() && !self.c0_estimate.is_empty() {
            Some(self.c0_estimate.iter().map(|&c| VProfile::constant(c)).collect())
        } else {
            None
        }
    }
    fn trunc_bound(&self, tau: C64) -> f64 {
        self.tail_bound(tau)
    }
}

// ---------------------------------------------------------------------------
// Siegel theta function
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct ThetaVector {
    q: Rat,
    qf: f64,
    r0: f64,
}

/// Theta(tau, z)(phi_mu) = v sum_{x in mu + L} e^{-2 pi v R0(x,z)} q^{Q(x)},
/// prepared with an exhaustive majorant-ball enumeration Q_z <= lambda_cut.
pub struct SiegelTheta {
    pub lattice: Arc<EvenLattice>,
    pub rep: Arc<WeilRep>,
    pub z: MajorantPoint,
    vectors: Vec<Vec<ThetaVector>>,
    pub lambda_cut: f64,
    pub wall_tol: f64,
    weight: HalfInt,
}

impl SiegelTheta {
    pub fn new(
        lattice: Arc<EvenLattice>,
        rep: Arc<WeilRep>,
        z: MajorantPoint,
        lambda_cut: f64,
    ) -> Result<Self> {
        let (p, q) = lattice.signature;
        if z.basis.len() != q {
            return Err(Error::MissingMajorant);
        }
        let mut vectors = Vec::with_capacity(rep.dim());
        for mu in 0..rep.dim() {
            let coset = &rep.disc.reps[mu];
            let vecs = enumerate_coset_vectors(
                &lattice,
                coset,
                Target::MajorantBall { z: &z, bound: lambda_cut, norm: None },
                ENUM_CAP,
            )?;
            let mut tv: Vec<ThetaVector> = vecs
                .iter()
                .map(|x| {
                    let xf: Vec<f64> = x.iter().map(|&r| rat_f64(r)).collect();
                    let qx = lattice.quad_rat(x);
                    ThetaVector { q: qx, qf: rat_f64(qx), r0: z.r_zero(&lattice, &xf) }
                })
                .collect();
            tv.sort_by(|a, b| a.q.cmp(&b.q).then(a.r0.partial_cmp(&b.r0).unwrap()));
            vectors.push(tv);
        }
        let weight = HalfInt::half(p as i32 - 2); // p/2 - 1
        Ok(SiegelTheta { lattice, rep, z, vectors, lambda_cut, wall_tol: 1e-8, weight })
    }

    /// Norms represented in the enumeration window.
    pub fn mode_set(&self) -> Vec<Rat> {
        let mut set: Vec<Rat> = Vec::new();
        for tv in &self.vectors {
            for t in tv {
                if !set.contains(&t.q) {
                    set.push(t.q);
                }
            }
        }
        set.sort();
        set
    }

    /// Per-coset count of vectors of norm m orthogonal to z.
    pub fn wall_count(&self, m: Rat) -> Vec<usize> {
        self.vectors
            .iter()
            .map(|tv| tv.iter().filter(|t| t.q == m && t.r0 < self.wall_tol).count())
            .collect()
    }
}

impl ModularFn for SiegelTheta {
    fn dim(&self) -> usize {
        self.rep.dim()
    }
    fn weight(&self) -> HalfInt {
        self.weight
    }
    fn is_dual(&self) -> bool {
        true
    }

    fn eval(&self, tau: C64) -> Result<Vec<C64>> {
        let v = tau.im;
        let mut out = zeros(self.dim());
        for (mu, tv) in self.vectors.iter().enumerate() {
            let mut acc = C64::zero();
            for t in tv {
                let mag = v * libm::exp(-TWO_PI * v * (t.r0 + t.qf));
                let phase = (C64::new(0.0, TWO_PI * t.qf * tau.re)).exp();
                acc += mag * phase;
            }
            out[mu] = acc;
        }
        Ok(out)
    }

    fn eval_peeled(&self, _tau: C64) -> Result<Vec<C64>> {
        Ok(zeros(self.dim()))
    }
    fn peeled_is_zero(&self) -> bool {
        true
    }
    fn declared_modes(&self) -> Vec<Rat> {
        self.mode_set()
    }

    fn known_mode_profile(&self, m: Rat) -> Option<Vec<VProfile>> {
        // complete for norms well inside the window; outside, vectors beyond
        // the enumeration ball are covered by trunc_bound
        let mf = rat_f64(m);
        if mf > self.lambda_cut {
            return None;
        }
        let mut out = Vec::with_capacity(self.dim());
        for tv in &self.vectors {
            let mut p = VProfile::default();
            for t in tv.iter().filter(|t| t.q == m) {
                if t.r0 < self.wall_tol {
                    p = p.add(&VProfile::power(C64::new(1.0, 0.0), Rat::from_integer(1)));
                } else {
                    p = p.add(&VProfile::exp_decay(C64::new(1.0, 0.0), 1, TWO_PI * t.r0));
                }
            }
            out.push(p);
        }
        Some(out)
    }

    fn trunc_bound(&self, tau: C64) -> f64 {
        let v = tau.im;
        let n = self.lattice.rank as f64;
        let count = libm::pow(3.0 + libm::sqrt(2.0 * self.lambda_cut), n);
        v * count * libm::exp(-TWO_PI * v * self.lambda_cut)
    }
}

// ---------------------------------------------------------------------------
// definite (holomorphic) theta
// ---------------------------------------------------------------------------

/// theta_Lambda(tau)(phi_nu) = sum_m mu(m)(phi_nu) q^m for positive definite
/// Lambda, with integer representation numbers up to m_max.
pub struct DefiniteTheta {
    pub lattice: Arc<EvenLattice>,
    pub rep: Arc<WeilRep>,
    pub m_max: Rat,
    pub counts: Vec<BTreeMap<Rat, u64>>,
    weight: HalfInt,
}

impl DefiniteTheta {
    pub fn new(lattice: Arc<EvenLattice>, rep: Arc<WeilRep>, m_max: Rat) -> Result<Self> {
        if !lattice.is_positive_definite() {
            return Err(Error::NotDefinite);
        }
        let gram_f: Vec<Vec<f64>> =
            lattice.gram.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
        let z = MajorantPoint { basis: Vec::new(), majorant: gram_f };
        let mut counts = Vec::with_capacity(rep.dim());
        for mu in 0..rep.dim() {
            let coset = &rep.disc.reps[mu];
            let vecs = enumerate_coset_vectors(
                &lattice,
                coset,
                Target::MajorantBall { z: &z, bound: rat_f64(m_max) + 1e-9, norm: None },
                ENUM_CAP,
            )?;
            let mut map: BTreeMap<Rat, u64> = BTreeMap::new();
            for x in &vecs {
                let q = lattice.quad_rat(x);
                if q <= m_max {
                    *map.entry(q).or_insert(0) += 1;
                }
            }
            counts.push(map);
        }
        let weight = HalfInt::half(lattice.rank as i32);
        Ok(DefiniteTheta { lattice, rep, m_max, counts, weight })
    }

    /// mu(m): representation numbers per coset.
    pub fn coefficient(&self, m: Rat) -> Vec<f64> {
        self.counts.iter().map(|c| *c.get(&m).unwrap_or(&0) as f64).collect()
    }

    /// The holomorphic expansion with integer coefficients.
    pub fn expansion(&self) -> FourierExpansion {
        let mut f = FourierExpansion::new(self.weight, true, self.rep.dim(), Growth::Moderate);
        let mut modes: Vec<Rat> = self.counts.iter().flat_map(|c| c.keys().copied()).collect();
        modes.sort();
        modes.dedup();
        for m in modes {
            let profs: Vec<VProfile> = self
                .coefficient(m)
                .into_iter()
                .map(|c| VProfile::constant(C64::new(c, 0.0)))
                .collect();
            f.set(m, profs);
        }
        f
    }
}

impl ModularFn for DefiniteTheta {
    fn dim(&self) -> usize {
        self.rep.dim()
    }
    fn weight(&self) -> HalfInt {
        self.weight
    }
    fn is_dual(&self) -> bool {
        true
    }
    fn eval(&self, tau: C64) -> Result<Vec<C64>> {
        let mut out = zeros(self.dim());
        for (mu, map) in self.counts.iter().enumerate() {
            out[mu] = map.iter().map(|(&m, &c)| c as f64 * q_pow(rat_f64(m), tau)).sum();
        }
        Ok(out)
    }
    fn eval_peeled(&self, _tau: C64) -> Result<Vec<C64>> {
        Ok(zeros(self.dim()))
    }
    fn peeled_is_zero(&self) -> bool {
        true
    }
    fn declared_modes(&self) -> Vec<Rat> {
        let mut modes: Vec<Rat> = self.counts.iter().flat_map(|c| c.keys().copied()).collect();
        modes.sort();
        modes.dedup();
        modes
    }
    fn known_mode_profile(&self, m: Rat) -> Option<Vec<VProfile>> {
        if m > self.m_max {
            return None;
        }
        Some(
            self.coefficient(m)
                .into_iter()
                .map(|c| VProfile::constant(C64::new(c, 0.0)))
                .collect(),
        )
    }
    fn trunc_bound(&self, tau: C64) -> f64 {
        let n = self.lattice.rank as f64;
        let mf = rat_f64(self.m_max);
        libm::pow(3.0 + libm::sqrt(2.0 * mf), n) * libm::exp(-TWO_PI * tau.im * mf)
    }
}

// ---------------------------------------------------------------------------
// q-expansion handles (supplied data)
// ---------------------------------------------------------------------------

/// A fully declared Fourier expansion used as a function handle.
pub struct QExpansionFn {
    pub exp: FourierExpansion,
}

impl QExpansionFn {
    pub fn new(exp: FourierExpansion) -> Self {
        QExpansionFn { exp }
    }
}

impl ModularFn for QExpansionFn {
    fn dim(&self) -> usize {
        self.exp.dim
    }
    fn weight(&self) -> HalfInt {
        self.exp.weight
    }
    fn is_dual(&self) -> bool {
        self.exp.dual
    }
    fn eval(&self, tau: C64) -> Result<Vec<C64>> {
        self.exp.eval(tau)
    }
    fn eval_peeled(&self, _tau: C64) -> Result<Vec<C64>> {
        Ok(zeros(self.exp.dim))
    }
    fn peeled_is_zero(&self) -> bool {
        true
    }
    fn declared_modes(&self) -> Vec<Rat> {
        self.exp.coeffs.keys().copied().collect()
    }
    fn known_mode_profile(&self, m: Rat) -> Option<Vec<VProfile>> {
        match self.exp.coeffs.get(&m) {
            Some(p) => Some(p.clone()),
            None => Some(vec![VProfile::default(); self.exp.dim]),
        }
    }
}

/// (-1)^{negate} v^kappa conj(G) for a holomorphic expansion G of weight
/// kappa: the weight -kappa dual partner used by the regularized Petersson
/// pairing and the mock-shadow inputs.
pub struct ConjScaled {
    pub inner: FourierExpansion,
    pub kappa: HalfInt,
    pub negate: bool,
}

impl ConjScaled {
    pub fn new(inner: FourierExpansion, negate: bool) -> Self {
        let kappa = inner.weight;
        ConjScaled { inner, kappa, negate }
    }
    fn sign(&self) -> f64 {
        if self.negate {
            -1.0
        } else {
            1.0
        }
    }
}

impl ModularFn for ConjScaled {
    fn dim(&self) -> usize {
        self.inner.dim
    }
    fn weight(&self) -> HalfInt {
        -self.kappa
    }
    fn is_dual(&self) -> bool {
        !self.inner.dual
    }
    fn eval(&self, tau: C64) -> Result<Vec<C64>> {
        let base = self.inner.eval(tau)?;
        let scale = libm::pow(tau.im, self.kappa.as_f64()) * self.sign();
        Ok(base.into_iter().map(|x| scale * x.conj()).collect())
    }
    fn eval_peeled(&self, _tau: C64) -> Result<Vec<C64>> {
        Ok(zeros(self.inner.dim))
    }
    fn peeled_is_zero(&self) -> bool {
        true
    }
    fn declared_modes(&self) -> Vec<Rat> {
        self.inner.coeffs.keys().map(|&m| -m).collect()
    }
    fn known_mode_profile(&self, m: Rat) -> Option<Vec<VProfile>> {
        // v^kappa conj(c_j q^j) sits at mode -j with profile
        // conj(c_j) v^kappa e^{-4 pi j v}
        let j = -m;
        let kf = self.kappa.as_f64();
        let kr = Rat::new(self.kappa.twice() as i64, 2);
        match self.inner.coeffs.get(&j) {
            None => Some(vec![VProfile::default(); self.inner.dim]),
            Some(profs) => Some(
                profs
                    .iter()
                    .map(|p| {
                        let c = p.constant_part().conj() * self.sign();
                        let jf = rat_f64(j);
                        if jf == 0.0 {
                            VProfile::power(c, kr)
                        } else if kf == libm::round(kf) {
                            VProfile::exp_decay(
                                c,
                                kf as i32,
                                4.0 * core::f64::consts::PI * jf,
                            )
                        } else {
                            VProfile::default()
                        }
                    })
                    .collect(),
            ),
        }
    }
}

// ---------------------------------------------------------------------------
// Eisenstein series
// ---------------------------------------------------------------------------

/// E_k(tau, s) = sum over Gamma_infty \ Gamma of (v^{(s+1-k)/2} phi_0^vee)|_k,
/// direct summation for Re(s) > 1 with the class {+-(c,d)} cut at c <= cmax
/// and a per-term magnitude threshold eps.
pub struct Eisenstein {
    pub rep: Arc<WeilRep>,
    pub k: i32,
    pub s: C64,
    pub cmax: i64,
    pub eps: f64,
}

impl Eisenstein {
    pub fn new(rep: Arc<WeilRep>, k: i32, s: C64, cmax: i64, eps: f64) -> Result<Self> {
        if s.re <= 1.0 {
            return Err(Error::OutsideConvergence);
        }
        if !rep.parity_ok(HalfInt::int(k)) {
            return Err(Error::WeightParityMismatch);
        }
        Ok(Eisenstein { rep, k, s, cmax, eps })
    }

    /// Tail estimate ~ K(tau) cmax^{1-Re s}.
    pub fn tail_bound(&self, tau: C64) -> f64 {
        let sr = self.s.re;
        let v = tau.im;
        let vpow = libm::pow(v, (sr + 1.0 - self.k as f64) / 2.0);
        4.0 * vpow * libm::pow(v * self.cmax as f64, -sr)
            * self.cmax as f64
            * libm::pow(self.cmax as f64, 1.0 - sr)
            / (sr - 1.0)
            + self.eps * 8.0 * self.cmax as f64
    }
}

impl ModularFn for Eisenstein {
    fn dim(&self) -> usize {
        self.rep.dim()
    }
    fn weight(&self) -> HalfInt {
        HalfInt::int(self.k)
    }
    fn is_dual(&self) -> bool {
        true
    }

    fn eval(&self, tau: C64) -> Result<Vec<C64>> {
        let exponent = (self.s + C64::new(1.0 - self.k as f64, 0.0)) * 0.5;
        let trivial = self.dim() == 1;
        let seed = SchwartzVector::basis(self.dim(), 0, true);
        let mut terms: Vec<Vec<C64>> = Vec::new();
        let v_pow = (exponent * libm::log(tau.im)).exp();
        terms.push(seed.coords.iter().map(|&x| v_pow * x).collect());
        // |term| ~ |c tau + d|^{-(Re s + 1)} v^{(s+1-k)/2}: window from eps
        let decay = self.s.re + 1.0;
        let scale = libm::pow(tau.im, (self.s.re + 1.0 - self.k as f64) / 2.0);
        let rcut = libm::pow(self.eps / scale.max(1e-300), -1.0 / decay).max(2.0);
        for c in 1..=self.cmax {
            if c as f64 * tau.im > rcut {
                break;
            }
            let span = libm::ceil(c as f64 * tau.re.abs() + rcut) as i64;
            for d in -span..=span {
                let den = C64::new(c as f64, 0.0) * tau + C64::new(d as f64, 0.0);
                if den.norm() > rcut {
                    continue;
                }
                if num_integer::gcd(c, d) != 1 {
                    continue;
                }
                let im_g = tau.im / den.norm_sqr();
                let v_pow = (exponent * libm::log(im_g)).exp();
                let auto = (-C64::new(self.k as f64, 0.0) * den.ln()).exp();
                if trivial {
                    terms.push(vec![auto * v_pow]);
                } else {
                    let (a, b) = complete_to_sl2(c, d);
                    let g = MpElement { m: [[a, b], [c, d]], branch: false };
                    let rv = self.rep.apply_inverse(&g, &seed)?;
                    terms.push(rv.coords.iter().map(|&x| auto * v_pow * x).collect());
                }
            }
        }
        Ok(sum_columns(&terms, self.dim()))
    }

    fn trunc_bound(&self, tau: C64) -> f64 {
        self.tail_bound(tau)
    }
}

// ---------------------------------------------------------------------------
// contraction to the boundary quotient
// ---------------------------------------------------------------------------

/// Contraction data: the quotient lattice n^perp / n and the fiberwise coset
/// map S(L) -> S(n^perp / n).
pub struct Contraction {
    pub quotient: EvenLattice,
    pub quotient_disc: crate::lattice::DiscriminantGroup,
    /// for each quotient coset nu, the source cosets mu with mu|_{n-perp} = nu
    pub fibers: Vec<Vec<usize>>,
}

/// Build the contraction map for a primitive isotropic vector n.
pub fn contraction(
    lat: &EvenLattice,
    disc: &crate::lattice::DiscriminantGroup,
    n_vec: &[i64],
) -> Result<Contraction> {
    let n = lat.rank;
    let nq: Vec<Rat> = n_vec.iter().map(|&x| Rat::from_integer(x)).collect();
    if lat.quad_rat(&nq) != Rat::zero() {
        return Err(Error::NotIsotropic);
    }
    let g = n_vec.iter().fold(0i64, |acc, &x| num_integer::gcd(acc, x));
    if g != 1 {
        return Err(Error::NotPrimitive);
    }

    let pair: Vec<i64> =
        (0..n).map(|i| (0..n).map(|j| lat.gram[i][j] * n_vec[j]).sum::<i64>()).collect();
    let perp = integer_kernel(&pair)?;
    let basis = basis_through(&perp, n_vec)?;
    let quot_basis: Vec<Vec<i64>> = basis[1..].to_vec();
    let r = quot_basis.len();
    let mut qgram = vec![vec![0i64; r]; r];
    for i in 0..r {
        for j in 0..r {
            let mut acc = 0i64;
            for a in 0..n {
                for b in 0..n {
                    acc += quot_basis[i][a] * lat.gram[a][b] * quot_basis[j][b];
                }
            }
            qgram[i][j] = acc;
        }
    }
    let quotient = crate::lattice::build_lattice(&qgram)?;
    let quotient_disc = crate::lattice::discriminant_group(&quotient)?;

    // zeta in L' with (zeta, n) = 1: the coefficients of zeta = G^{-1} m pair
    // with n through m . n_coords, solvable since n is primitive
    let zeta = dual_with_unit_pairing(lat, n_vec)?;

    // mu restricts iff (mu, n) is integral; its image is the class of
    // mu - (mu, n) zeta, written in the {n, w_i} coordinates of the
    // orthogonal complement and read off in the quotient
    let mut fibers: Vec<Vec<usize>> = vec![Vec::new(); quotient_disc.dim()];
    for (mu, rep_mu) in disc.reps.iter().enumerate() {
        let with_n = rep_mu
            .iter()
            .zip(&pair)
            .map(|(&x, &p)| x * Rat::from_integer(p))
            .fold(Rat::zero(), |a, b| a + b);
        if !with_n.is_integer() {
            continue;
        }
        let y: Vec<Rat> =
            (0..n).map(|t| rep_mu[t] - with_n * zeta[t]).collect();
        // solve y = alpha n + sum beta_i w_i over Q
        let mut span: Vec<Vec<Rat>> = Vec::with_capacity(r + 1);
        span.push(n_vec.iter().map(|&x| Rat::from_integer(x)).collect());
        for wq in &quot_basis {
            span.push(wq.iter().map(|&x| Rat::from_integer(x)).collect());
        }
        let coeffs = solve_rational(&span, &y).ok_or(Error::NotPrimitive)?;
        let beta: Vec<Rat> = coeffs[1..].to_vec();
        let nu = quotient_disc.coset_index(&beta).ok_or(Error::NotPrimitive)?;
        fibers[nu].push(mu);
    }
    Ok(Contraction { quotient, quotient_disc, fibers })
}

/// Rational vector zeta with G zeta integral (zeta in L') and (zeta, n) = 1.
fn dual_with_unit_pairing(lat: &EvenLattice, n_vec: &[i64]) -> Result<Vec<Rat>> {
    let r = lat.rank;
    // zeta = G^{-1} m with sum m_i n_i = 1: build m by a gcd chain
    let mut m = vec![0i64; r];
    let mut g = 0i64;
    for i in 0..r {
        if n_vec[i] == 0 {
            continue;
        }
        if g == 0 {
            m[i] = n_vec[i].signum();
            g = n_vec[i].abs();
            continue;
        }
        // g_new = gcd(g, n_i) = a g + b n_i
        let (gn, a, b) = egcd64(g, n_vec[i]);
        for t in m.iter_mut() {
            *t *= a;
        }
        m[i] = b;
        g = gn;
    }
    if g != 1 {
        return Err(Error::NotPrimitive);
    }
    // zeta = G^{-1} m via exact solve of G zeta = m
    let gq: Vec<Vec<Rat>> =
        lat.gram.iter().map(|row| row.iter().map(|&x| Rat::from_integer(x)).collect()).collect();
    let mq: Vec<Rat> = m.iter().map(|&x| Rat::from_integer(x)).collect();
    solve_linear_system(&gq, &mq).ok_or(Error::Singular)
}

fn egcd64(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a.abs(), a.signum(), 0)
    } else {
        let (g, x, y) = egcd64(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Solve target = sum c_i span_i over Q (span linearly independent).
fn solve_rational(span: &[Vec<Rat>], target: &[Rat]) -> Option<Vec<Rat>> {
    let k = span.len();
    let n = target.len();
    let a: Vec<Vec<Rat>> = (0..n).map(|i| (0..k).map(|j| span[j][i]).collect()).collect();
    solve_least_rational(&a, target, k)
}

/// Solve the square system a x = b exactly.
fn solve_linear_system(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    solve_least_rational(a, b, a.len())
}

fn solve_least_rational(a: &[Vec<Rat>], b: &[Rat], k: usize) -> Option<Vec<Rat>> {
    let n = b.len();
    let mut aug: Vec<Vec<Rat>> = (0..n)
        .map(|i| {
            (0..k).map(|j| a[i][j]).chain(core::iter::once(b[i])).collect()
        })
        .collect();
    let mut row = 0usize;
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    for col in 0..k {
        if let Some(r) = (row..n).find(|&r| !aug[r][col].is_zero()) {
            aug.swap(row, r);
            let p = aug[row][col];
            for c in 0..=k {
                aug[row][c] /= p;
            }
            for r2 in 0..n {
                if r2 != row && !aug[r2][col].is_zero() {
                    let f = aug[r2][col];
                    for c in 0..=k {
                        let t = aug[row][c] * f;
                        aug[r2][c] -= t;
                    }
                }
            }
            pivots.push((row, col));
            row += 1;
        }
    }
    for r in row..n {
        if !aug[r][k].is_zero() {
            return None;
        }
    }
    let mut out = vec![Rat::zero(); k];
    for &(r, c) in &pivots {
        out[c] = aug[r][k];
    }
    Some(out)
}

impl Contraction {
    /// c(phi)(nu) = sum of phi over the fiber of nu.
    pub fn apply(&self, phi: &SchwartzVector) -> SchwartzVector {
        let coords: Vec<C64> =
            self.fibers.iter().map(|f| f.iter().map(|&mu| phi.coords[mu]).sum()).collect();
        SchwartzVector { coords, dual: phi.dual }
    }
}

/// Basis of the integer kernel of the linear form x -> sum pair_i x_i.
fn integer_kernel(pair: &[i64]) -> Result<Vec<Vec<i64>>> {
    let n = pair.len();
    let mut row: Vec<i128> = pair.iter().map(|&x| x as i128).collect();
    let mut v: Vec<Vec<i128>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { 1 } else { 0 }).collect()).collect();
    loop {
        let nz: Vec<usize> = (0..n).filter(|&j| row[j] != 0).collect();
        if nz.len() <= 1 {
            break;
        }
        let piv = *nz.iter().min_by_key(|&&j| row[j].abs()).unwrap();
        for &j in &nz {
            if j == piv {
                continue;
            }
            let f = row[j].div_euclid(row[piv]);
            row[j] -= f * row[piv];
            for r in v.iter_mut() {
                let t = r[piv] * f;
                r[j] -= t;
            }
        }
    }
    let pivot = (0..n).find(|&j| row[j] != 0);
    let mut out = Vec::new();
    for j in 0..n {
        if Some(j) == pivot {
            continue;
        }
        let col: Vec<i64> = (0..n)
            .map(|i| v[i][j].try_into().map_err(|_| Error::Overflow))
            .collect::<Result<_>>()?;
        out.push(col);
    }
    Ok(out)
}

/// Change basis of the span so the first vector equals `first`, which must be
/// primitive in the span. Reduces the coefficient vector of `first` by a gcd
/// chain, each step compensated by the inverse row operation on the basis so
/// that sum c_i S_i stays equal to `first` and the row span is unchanged.
fn basis_through(span: &[Vec<i64>], first: &[i64]) -> Result<Vec<Vec<i64>>> {
    let k = span.len();
    let mut basis: Vec<Vec<i128>> =
        span.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut c: Vec<i128> =
        solve_int_combination(span, first)?.iter().map(|&x| x as i128).collect();
    loop {
        let nz: Vec<usize> = (0..k).filter(|&i| c[i] != 0).collect();
        if nz.len() <= 1 {
            break;
        }
        let &i = nz.iter().min_by_key(|&&i| c[i].abs()).unwrap();
        for &j in &nz {
            if j == i {
                continue;
            }
            let f = c[j].div_euclid(c[i]);
            c[j] -= f * c[i];
            // c_j S_j + c_i S_i invariant: S_i += f S_j
            for t in 0..basis[i].len() {
                let add = f * basis[j][t];
                basis[i][t] += add;
            }
        }
    }
    let pos = (0..k).find(|&i| c[i] != 0).ok_or(Error::NotPrimitive)?;
    if c[pos].abs() != 1 {
        return Err(Error::NotPrimitive);
    }
    if c[pos] == -1 {
        for t in basis[pos].iter_mut() {
            *t = -*t;
        }
    }
    basis.swap(0, pos);
    let out: Vec<Vec<i64>> = basis
        .iter()
        .map(|r| r.iter().map(|&x| x.try_into().map_err(|_| Error::Overflow)).collect())
        .collect::<Result<_>>()?;
    debug_assert_eq!(out[0], first);
    Ok(out)
}

fn solve_int_combination(span: &[Vec<i64>], target: &[i64]) -> Result<Vec<i64>> {
    let k = span.len();
    let n = target.len();
    let mut aug: Vec<Vec<Rat>> = (0..n)
        .map(|i| {
            (0..k)
                .map(|j| Rat::from_integer(span[j][i]))
                .chain(core::iter::once(Rat::from_integer(target[i])))
                .collect()
        })
        .collect();
    let mut row = 0usize;
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    for col in 0..k {
        if let Some(r) = (row..n).find(|&r| !aug[r][col].is_zero()) {
            aug.swap(row, r);
            let p = aug[row][col];
            for c in 0..=k {
                aug[row][c] /= p;
            }
            for r2 in 0..n {
                if r2 != row && !aug[r2][col].is_zero() {
                    let f = aug[r2][col];
                    for c in 0..=k {
                        let t = aug[row][c] * f;
                        aug[r2][c] -= t;
                    }
                }
            }
            pivots.push((row, col));
            row += 1;
        }
    }
    for r in row..n {
        if !aug[r][k].is_zero() {
            return Err(Error::NotPrimitive);
        }
    }
    let mut out = vec![0i64; k];
    for &(r, c) in &pivots {
        let val = aug[r][k];
        if !val.is_integer() {
            return Err(Error::NotPrimitive);
        }
        out[c] = val.to_integer();
    }
    Ok(out)
}
