//! Analytic core for vector-valued modular forms attached to even lattices:
//! discriminant forms and the Weil representation, Siegel and definite theta
//! functions, truncated and Hejhal Poincare series, regularized pairings, the
//! two families of automorphic Green functions, and a constructive section of
//! the Maass lowering operator.
//!
//! The crate is `no_std` + `alloc`; all IO, caching and the command line live
//! in the companion `rlt-cli` crate.

#![no_std]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod lattice;
pub mod linalg;
pub mod lsharp;
pub mod maass;
pub mod qseries;
pub mod reglift;
pub mod series;
pub mod weilrep;

pub use error::Error;

/// Complex double used throughout.
pub type C64 = num_complex::Complex64;

/// Exact rational scalar (coset coordinates, Q-values mod 1, Fourier indices).
pub type Rat = num_rational::Ratio<i64>;

/// Result alias with the crate error type.
pub type Result<T> = core::result::Result<T, Error>;

/// Deterministic pairwise (tree) reduction of a slice of complex numbers.
///
/// The reduction order depends only on the slice length, so sums are bitwise
/// reproducible regardless of how the terms were produced.
pub fn tree_sum(terms: &[C64]) -> C64 {
    match terms.len() {
        0 => C64::new(0.0, 0.0),
        1 => terms[0],
        n => {
            let mid = n / 2;
            tree_sum(&terms[..mid]) + tree_sum(&terms[mid..])
        }
    }
}

/// e(x) = exp(2 pi i x) for an exact rational phase.
pub fn e_rat(x: Rat) -> C64 {
    let t = 2.0 * core::f64::consts::PI * rat_f64(x);
    C64::new(libm::cos(t), libm::sin(t))
}

/// Rational to f64.
pub fn rat_f64(x: Rat) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}
