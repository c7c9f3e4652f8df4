//! Symbolic v-profiles: finite sums of v-powers, log v, incomplete-Gamma
//! terms and a constant, plus an optional exponentially-decaying numeric
//! remainder. Fourier coefficients of every series in this crate live in
//! this class, which is what makes regularized integrals splittable into
//! closed-form tails plus convergent numerics.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::maass::special::{beta_fn, incomplete_gamma};
use crate::{rat_f64, C64, Error, Rat, Result};

/// Numeric remainder with a decay certificate |r(v)| <= K e^{-decay v}.
#[derive(Clone)]
pub struct Remainder {
    pub decay: f64,
    pub sampler: Arc<dyn Fn(f64) -> C64 + Send + Sync>,
}

impl core::fmt::Debug for Remainder {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "Remainder {{ decay: {} }}", self.decay)
    }
}

/// a_i v^{beta_i} + l log v + sum b_j Gamma(s_j, x_j v) + sum e_r v^{p_r} e^{-x_r v}
/// + c (+ remainder).
#[derive(Debug, Clone, Default)]
pub struct VProfile {
    pub constant: C64,
    /// (coefficient, exponent beta), beta != 0.
    pub power_terms: Vec<(C64, Rat)>,
    pub log_coeff: C64,
    /// (coefficient, s, x): b * Gamma(s, x v), x > 0.
    pub gamma_terms: Vec<(C64, f64, f64)>,
    /// (coefficient, pow, x): a * v^pow * e^{-x v}, x > 0, integer pow.
    pub exp_terms: Vec<(C64, i32, f64)>,
    pub remainder: Option<Remainder>,
}

/// Closed-form regularized tail of a profile.
#[derive(Debug, Clone, Copy, Default)]
pub struct TailCt {
    /// CT_{s=0} of the meromorphic tail.
    pub finite: C64,
    /// Coefficient of the subtracted log T.
    pub log_t: C64,
}

impl VProfile {
    pub fn constant(c: C64) -> Self {
        VProfile { constant: c, ..Default::default() }
    }

    pub fn power(a: C64, beta: Rat) -> Self {
        if beta.is_zero() {
            return Self::constant(a);
        }
        VProfile { power_terms: alloc::vec![(a, beta)], ..Default::default() }
    }

    /// a * v^pow * e^{-x v}.
    pub fn exp_decay(a: C64, pow: i32, x: f64) -> Self {
        debug_assert!(x > 0.0);
        let mut p = VProfile::default();
        p.exp_terms.push((a, pow, x));
        p
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero()
            && self.power_terms.is_empty()
            && self.log_coeff.is_zero()
            && self.gamma_terms.is_empty()
            && self.exp_terms.is_empty()
            && self.remainder.is_none()
    }

    /// The declared part (everything except the remainder) at v > 0.
    pub fn evaluate_declared(&self, v: f64) -> Result<C64> {
        if v <= 0.0 {
            return Err(Error::NonPositiveArgument);
        }
        let mut acc = self.constant;
        for &(a, beta) in &self.power_terms {
            acc += a * libm::pow(v, rat_f64(beta));
        }
        if !self.log_coeff.is_zero() {
            acc += self.log_coeff * libm::log(v);
        }
        for &(b, s, x) in &self.gamma_terms {
            acc += b * incomplete_gamma(s, x * v)?;
        }
        for &(a, pow, x) in &self.exp_terms {
            acc += a * libm::pow(v, pow as f64) * libm::exp(-x * v);
        }
        Ok(acc)
    }

    /// Full evaluation including the remainder sampler.
    pub fn evaluate(&self, v: f64) -> Result<C64> {
        let mut acc = self.evaluate_declared(v)?;
        if let Some(r) = &self.remainder {
            acc += (r.sampler)(v);
        }
        Ok(acc)
    }

    /// The constant part (the coefficient kappa in Eq.-(2.8)-style splittings).
    pub fn constant_part(&self) -> C64 {
        self.constant
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = self.clone();
        out.constant *= c;
        for t in out.power_terms.iter_mut() {
            t.0 *= c;
        }
        out.log_coeff *= c;
        for t in out.gamma_terms.iter_mut() {
            t.0 *= c;
        }
        for t in out.exp_terms.iter_mut() {
            t.0 *= c;
        }
        if let Some(r) = out.remainder.take() {
            let s = r.sampler.clone();
            out.remainder =
                Some(Remainder { decay: r.decay, sampler: Arc::new(move |v| c * s(v)) });
        }
        out
    }

    pub fn add(&self, o: &VProfile) -> Self {
        let mut out = self.clone();
        out.constant += o.constant;
        for &(a, beta) in &o.power_terms {
            match out.power_terms.iter_mut().find(|(_, b)| *b == beta) {
                Some(t) => t.0 += a,
                None => out.power_terms.push((a, beta)),
            }
        }
        out.log_coeff += o.log_coeff;
        for &(b, s, x) in &o.gamma_terms {
            match out
                .gamma_terms
                .iter_mut()
                .find(|(_, s2, x2)| *s2 == s && (*x2 - x).abs() < 1e-15 * x.abs())
            {
                Some(t) => t.0 += b,
                None => out.gamma_terms.push((b, s, x)),
            }
        }
        for &(a, pow, x) in &o.exp_terms {
            match out
                .exp_terms
                .iter_mut()
                .find(|(_, p2, x2)| *p2 == pow && (*x2 - x).abs() < 1e-15 * x.abs())
            {
                Some(t) => t.0 += a,
                None => out.exp_terms.push((a, pow, x)),
            }
        }
        out.remainder = match (out.remainder.take(), o.remainder.clone()) {
            (None, r) => r,
            (r, None) => r,
            (Some(a), Some(b)) => {
                let (sa, sb) = (a.sampler.clone(), b.sampler.clone());
                Some(Remainder {
                    decay: a.decay.min(b.decay),
                    sampler: Arc::new(move |v| sa(v) + sb(v)),
                })
            }
        };
        out
    }

    fn is_scalar_like(&self) -> bool {
        self.power_terms.is_empty()
            && self.log_coeff.is_zero()
            && self.gamma_terms.is_empty()
            && self.exp_terms.is_empty()
            && self.remainder.is_none()
    }

    /// Product of declared parts. Remainders are dropped: products are only
    /// formed to build the subtraction profile of a pairing, which never
    /// includes decaying remainders.
    pub fn mul(&self, o: &VProfile) -> Result<VProfile> {
        if o.is_scalar_like() {
            let mut out = self.scale(o.constant);
            out.remainder = None;
            return Ok(out);
        }
        if self.is_scalar_like() {
            let mut out = o.scale(self.constant);
            out.remainder = None;
            return Ok(out);
        }
        // general case: only power x power expansions are needed in practice
        if !self.log_coeff.is_zero()
            || !o.log_coeff.is_zero()
            || !self.gamma_terms.is_empty()
            || !o.gamma_terms.is_empty()
            || !self.exp_terms.is_empty()
            || !o.exp_terms.is_empty()
        {
            return Err(Error::UnsupportedProfile);
        }
        let mut out = VProfile::default();
        let left: Vec<(C64, Rat)> = core::iter::once((self.constant, Rat::zero()))
            .chain(self.power_terms.iter().copied())
            .collect();
        let right: Vec<(C64, Rat)> = core::iter::once((o.constant, Rat::zero()))
            .chain(o.power_terms.iter().copied())
            .collect();
        for &(a, al) in &left {
            for &(b, be) in &right {
                let term = VProfile::power(a * b, al + be);
                out = out.add(&term);
            }
        }
        Ok(out)
    }

    /// CT_{s=0} lim_{T to infty} int_a^T profile(v) v^{-s-2} dv, with any pure
    /// v^1 term reported as a log T coefficient instead (the constant term of
    /// its Laurent expansion is -log a).
    pub fn tail_ct(&self, a: f64) -> Result<TailCt> {
        debug_assert!(a > 0.0);
        let mut out = TailCt::default();
        let one = Rat::from_integer(1);
        // constant: int_a^inf v^{-2} = 1/a
        out.finite += self.constant / a;
        for &(b, beta) in &self.power_terms {
            if beta == one {
                out.log_t += b;
                out.finite += -b * libm::log(a);
            } else {
                let bf = rat_f64(beta);
                out.finite += b * libm::pow(a, bf - 1.0) / (1.0 - bf);
            }
        }
        if !self.log_coeff.is_zero() {
            // int_a^inf log v * v^{-2} dv = (log a + 1)/a
            out.finite += self.log_coeff * ((libm::log(a) + 1.0) / a);
        }
        for &(b, s, x) in &self.gamma_terms {
            // int_a^inf Gamma(s, xv) v^{-2} dv = Gamma(s, xa)/a - x Gamma(s-1, xa)
            let g1 = incomplete_gamma(s, x * a)?;
            let g0 = if s == 1.0 { beta_fn(x * a)? } else { incomplete_gamma(s - 1.0, x * a)? };
            out.finite += b * (g1 / a - x * g0);
        }
        for &(c, pow, x) in &self.exp_terms {
            // int_a^inf v^{pow-2} e^{-xv} dv = x^{1-pow} Gamma(pow-1, xa)
            let s = pow as f64 - 1.0;
            let g = if s == 0.0 { beta_fn(x * a)? } else { incomplete_gamma(s, x * a)? };
            out.finite += c * libm::pow(x, -s) * g;
        }
        Ok(out)
    }
}
