//! Exponential integral, incomplete gamma and Kummer's M(1, b, x), the three
//! special functions everything else reduces to. Targets 1e-12 relative.

use crate::{Error, Result};

const MAX_ITER: usize = 500;

/// beta(r) = int_r^infty e^{-t} dt / t, the exponential integral E1.
///
/// Series for r < 1, modified Lentz continued fraction for r >= 1.
pub fn beta_fn(r: f64) -> Result<f64> {
    if r <= 0.0 {
        return Err(Error::NonPositiveArgument);
    }
    if r < 1.0 {
        // E1(r) = -gamma - ln r + sum_{n>=1} (-1)^{n+1} r^n / (n n!)
        const EULER_GAMMA: f64 = 0.577215664901532861;
        let mut sum = 0.0;
        let mut term = 1.0;
        for n in 1..=MAX_ITER {
            term *= -r / n as f64;
            let add = -term / n as f64;
            sum += add;
            if add.abs() < 1e-17 * (1.0 + sum.abs()) {
                return Ok(-EULER_GAMMA - libm::log(r) + sum);
            }
        }
        Err(Error::ConvergenceFailure)
    } else {
        // E1(r) = e^{-r} / (r + 1 - 1/(r + 3 - 4/(r + 5 - 9/(...))))
        let tiny = 1e-300;
        let mut f = r + 1.0;
        if f.abs() < tiny {
            f = tiny;
        }
        let mut c = f;
        let mut d = 0.0;
        for n in 1..=MAX_ITER {
            let an = -(n as f64) * (n as f64);
            let bn = r + 2.0 * n as f64 + 1.0;
            d = bn + an * d;
            if d.abs() < tiny {
                d = tiny;
            }
            c = bn + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-15 {
                return Ok(libm::exp(-r) / f);
            }
        }
        Err(Error::ConvergenceFailure)
    }
}

/// Upper incomplete gamma Gamma(s, x) for x > 0 and real s.
///
/// s > 0 uses the regularized pair (series / Lentz continued fraction);
/// s <= 0 recurses upward via Gamma(s, x) = (Gamma(s+1, x) - x^s e^{-x}) / s.
pub fn incomplete_gamma(s: f64, x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Err(Error::NonPositiveX);
    }
    if s == 0.0 {
        return beta_fn(x);
    }
    if s < 0.0 {
        let up = incomplete_gamma(s + 1.0, x)?;
        return Ok((up - libm::pow(x, s) * libm::exp(-x)) / s);
    }
    let gamma_s = libm::tgamma(s);
    let log_prefactor = -x + s * libm::log(x) - libm::lgamma(s);
    let prefactor = libm::exp(log_prefactor);
    if x < s + 1.0 {
        // P(s, x) by series, Gamma(s,x) = Gamma(s) (1 - P)
        let mut term = 1.0 / s;
        let mut sum = term;
        let mut sp = s;
        for _ in 0..MAX_ITER {
            sp += 1.0;
            term *= x / sp;
            sum += term;
            if term.abs() < sum.abs() * 1e-17 {
                return Ok(gamma_s * (1.0 - prefactor * sum));
            }
        }
        Err(Error::ConvergenceFailure)
    } else {
        // Q(s, x) by modified Lentz
        let tiny = 1e-300;
        let b0 = x + 1.0 - s;
        let mut f = if b0.abs() < tiny { tiny } else { b0 };
        let mut c = f;
        let mut d = 0.0;
        for n in 1..=MAX_ITER {
            let an = -(n as f64) * (n as f64 - s);
            let bn = x + 2.0 * n as f64 + 1.0 - s;
            d = bn + an * d;
            if d.abs() < tiny {
                d = tiny;
            }
            c = bn + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-15 {
                return Ok(gamma_s * prefactor / f);
            }
        }
        Err(Error::ConvergenceFailure)
    }
}

/// Kummer's confluent hypergeometric M(1, b, x) = sum_n x^n / (b)_n, b > 1.
pub fn kummer_m1(b: f64, x: f64) -> Result<f64> {
    if b <= 1.0 {
        return Err(Error::BadParameter);
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut bn = b;
    for _ in 0..20_000 {
        term *= x / bn;
        sum += term;
        bn += 1.0;
        if term.abs() < 1e-16 * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::ConvergenceFailure)
}

/// e^{-x} M(1, b, x), stable for large x via the lower incomplete gamma:
/// e^{-x} M(1, b, x) = (b - 1) x^{1-b} gamma(b-1, x).
pub fn kummer_m1_scaled(b: f64, x: f64) -> Result<f64> {
    if b <= 1.0 {
        return Err(Error::BadParameter);
    }
    if x <= 0.0 {
        if x == 0.0 {
            return Ok(1.0);
        }
        return Ok(libm::exp(-x) * kummer_m1(b, x)?);
    }
    if x < 30.0 {
        return Ok(libm::exp(-x) * kummer_m1(b, x)?);
    }
    let s = b - 1.0;
    let lower = libm::tgamma(s) - incomplete_gamma(s, x)?;
    Ok(s * libm::exp((1.0 - b) * libm::log(x)) * lower)
}
