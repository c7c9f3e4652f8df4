//! Fourier expansions with v-profile coefficients, formal singular parts,
//! the psi-pairing of the modularity criterion, and the eta-splitting used to
//! normalize preimages of the lowering operator.

use alloc::collections::BTreeMap;
use alloc::{vec, vec::Vec};

use num_traits::Zero;

use crate::maass::profile::VProfile;
use crate::weilrep::{HalfInt, SchwartzVector, WeilRep};
use crate::{rat_f64, C64, Error, Rat, Result};

/// Growth class towards the cusp.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Growth {
    Moderate,
    Exponential,
}

/// Weight- and representation-tagged map m -> (profile per component).
#[derive(Debug, Clone)]
pub struct FourierExpansion {
    pub weight: HalfInt,
    pub dual: bool,
    pub dim: usize,
    pub coeffs: BTreeMap<Rat, Vec<VProfile>>,
    pub growth: Growth,
}

impl FourierExpansion {
    pub fn new(weight: HalfInt, dual: bool, dim: usize, growth: Growth) -> Self {
        FourierExpansion { weight, dual, dim, coeffs: BTreeMap::new(), growth }
    }

    pub fn set(&mut self, m: Rat, profiles: Vec<VProfile>) {
        debug_assert_eq!(profiles.len(), self.dim);
        self.coeffs.insert(m, profiles);
    }

    pub fn set_component(&mut self, m: Rat, idx: usize, profile: VProfile) {
        let dim = self.dim;
        let entry = self.coeffs.entry(m).or_insert_with(|| vec![VProfile::default(); dim]);
        entry[idx] = profile;
    }

    /// Holomorphic iff every coefficient is a pure constant and indices are
    /// bounded below (the map is finite, so only the profile shape matters).
    pub fn is_holomorphic(&self) -> bool {
        self.coeffs.values().flatten().all(|p| {
            p.power_terms.is_empty()
                && p.log_coeff.is_zero()
                && p.gamma_terms.is_empty()
                && p.remainder.is_none()
        })
    }

    /// Evaluate sum_m c(m, v) q^m componentwise.
    pub fn eval(&self, tau: C64) -> Result<Vec<C64>> {
        let v = tau.im;
        let mut out = vec![C64::zero(); self.dim];
        for (&m, profiles) in &self.coeffs {
            let mf = rat_f64(m);
            let q_m = (C64::new(0.0, 2.0 * core::f64::consts::PI * mf) * tau).exp();
            for (i, p) in profiles.iter().enumerate() {
                if p.is_zero() {
                    continue;
                }
                out[i] += p.evaluate(v)? * q_m;
            }
        }
        Ok(out)
    }

    pub fn eval_vector(&self, tau: C64) -> Result<SchwartzVector> {
        Ok(SchwartzVector { coords: self.eval(tau)?, dual: self.dual })
    }
}

/// Formal Fourier polynomial with nonpositive indices (a singular part).
#[derive(Debug, Clone, Default)]
pub struct SingElement {
    pub dim: usize,
    pub dual: bool,
    pub terms: BTreeMap<Rat, Vec<C64>>,
}

impl SingElement {
    pub fn zero(dim: usize, dual: bool) -> Self {
        SingElement { dim, dual, terms: BTreeMap::new() }
    }
    pub fn is_zero(&self) -> bool {
        self.terms.values().flatten().all(|c| c.is_zero())
    }
}

/// Extract the principal part P(F) = sum_{m <= 0} kappa_F(m) q^m.
pub fn principal_part(f: &FourierExpansion) -> Result<SingElement> {
    let mut out = SingElement::zero(f.dim, f.dual);
    let mut negative_count = 0usize;
    for (&m, profiles) in &f.coeffs {
        if m > Rat::zero() {
            continue;
        }
        let consts: Vec<C64> = profiles.iter().map(|p| p.constant_part()).collect();
        if consts.iter().any(|c| !c.is_zero()) {
            if m < Rat::zero() {
                negative_count += 1;
                if negative_count > 10_000 {
                    return Err(Error::UnboundedPrincipalPart);
                }
            }
            out.terms.insert(m, consts);
        }
    }
    Ok(out)
}

/// psi(P)(g) = sum_{m <= 0} a_P(m) . c_g(-m), a finite contraction.
pub fn psi_pairing(p: &SingElement, g: &FourierExpansion) -> Result<C64> {
    if !g.is_holomorphic() || g.dim != p.dim || g.dual == p.dual {
        return Err(Error::RepMismatch);
    }
    let mut acc = C64::zero();
    for (&m, a) in &p.terms {
        if let Some(c) = g.coeffs.get(&(-m)) {
            for i in 0..p.dim {
                acc += a[i] * c[i].constant_part();
            }
        }
    }
    Ok(acc)
}

/// The natural splitting eta: the functional (n_i, mu_i) is sent to
/// q^{-n_i} phi-tilde_{mu_i}^vee. The supplied pairing matrix (functionals
/// against a spanning set) certifies independence; an empty basis gives the
/// zero map, which is the correct choice whenever M_k = 0.
pub fn eta_splitting(
    rep: &WeilRep,
    k: HalfInt,
    basis: &[(Rat, usize)],
    pairing_matrix: &[Vec<C64>],
) -> Result<Vec<SingElement>> {
    if basis.is_empty() {
        return Ok(Vec::new());
    }
    for (i, a) in basis.iter().enumerate() {
        for b in basis.iter().skip(i + 1) {
            if a == b {
                return Err(Error::DependentBasis);
            }
        }
    }
    if pairing_matrix.len() != basis.len() || !c64_nonsingular(pairing_matrix) {
        return Err(Error::DependentBasis);
    }
    let dim = rep.dim();
    let mut out = Vec::with_capacity(basis.len());
    for &(n, mu) in basis {
        // phi-tilde^vee = phi_mu^vee + eps phi_{-mu}^vee (no 1/2), realized as
        // twice the symmetrized seed with real coefficients
        let seed = SchwartzVector::basis(dim, mu, false);
        let sym = rep.symmetrized_seed(k, &seed)?;
        let coords: Vec<C64> = sym.coords.iter().map(|c| 2.0 * c).collect();
        let mut s = SingElement::zero(dim, true);
        s.terms.insert(-n, coords);
        out.push(s);
    }
    Ok(out)
}

fn c64_nonsingular(a: &[Vec<C64>]) -> bool {
    let n = a.len();
    if a.iter().any(|r| r.len() != n) {
        return false;
    }
    let mut m: Vec<Vec<C64>> = a.to_vec();
    let mut scale = 0.0f64;
    for r in &m {
        for c in r {
            scale = scale.max(c.norm());
        }
    }
    if scale == 0.0 {
        return false;
    }
    for k in 0..n {
        let (piv, mag) = (k..n).map(|i| (i, m[i][k].norm())).fold(
            (k, -1.0),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        );
        if mag < 1e-10 * scale {
            return false;
        }
        m.swap(k, piv);
        for i in (k + 1)..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                let s = m[k][j];
                m[i][j] -= f * s;
            }
        }
    }
    true
}
