//! Scalar q-series arithmetic (Laurent tails allowed) and the classical
//! weight-0 basis J_m = q^{-m} + O(q), used as supplied input where weakly
//! holomorphic data on the trivial discriminant form is required.

use alloc::{vec, vec::Vec};

use crate::maass::{FourierExpansion, Growth, VProfile};
use crate::weilrep::HalfInt;
use crate::{C64, Rat};

/// Laurent q-series sum_{n >= start} c[n - start] q^n with f64 coefficients.
#[derive(Debug, Clone)]
pub struct QSeries {
    pub start: i64,
    pub c: Vec<f64>,
}

impl QSeries {
    pub fn one() -> Self {
        QSeries { start: 0, c: vec![1.0] }
    }

    pub fn coeff(&self, n: i64) -> f64 {
        let i = n - self.start;
        if i < 0 || i as usize >= self.c.len() {
            0.0
        } else {
            self.c[i as usize]
        }
    }

    pub fn max_exp(&self) -> i64 {
        self.start + self.c.len() as i64 - 1
    }

    pub fn truncate(&mut self, max_exp: i64) {
        let keep = (max_exp - self.start + 1).max(0) as usize;
        self.c.truncate(keep);
    }

    pub fn mul(&self, o: &QSeries, max_exp: i64) -> QSeries {
        let start = self.start + o.start;
        let len = (max_exp - start + 1).max(0) as usize;
        let mut c = vec![0.0; len];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                let k = i + j;
                if k < len {
                    c[k] += a * b;
                }
            }
        }
        QSeries { start, c }
    }

    pub fn add_scaled(&self, o: &QSeries, f: f64) -> QSeries {
        let start = self.start.min(o.start);
        let end = self.max_exp().max(o.max_exp());
        let mut c = vec![0.0; (end - start + 1) as usize];
        for (i, &a) in self.c.iter().enumerate() {
            c[(self.start - start) as usize + i] += a;
        }
        for (j, &b) in o.c.iter().enumerate() {
            c[(o.start - start) as usize + j] += f * b;
        }
        QSeries { start, c }
    }

    /// Inverse of a series with unit leading coefficient.
    pub fn inverse(&self, max_exp: i64) -> QSeries {
        assert!((self.c[0] - 1.0).abs() < 1e-9, "inverse needs unit leading coefficient");
        let start = -self.start;
        let len = (max_exp - start + 1).max(0) as usize;
        let mut c = vec![0.0; len];
        if len == 0 {
            return QSeries { start, c };
        }
        c[0] = 1.0;
        for k in 1..len {
            let mut acc = 0.0;
            for j in 1..=k {
                if j < self.c.len() {
                    acc += self.c[j] * c[k - j];
                }
            }
            c[k] = -acc;
        }
        QSeries { start, c }
    }
}

/// sigma_k(n), divisor power sum.
pub fn sigma(n: i64, k: u32) -> i64 {
    (1..=n).filter(|d| n % d == 0).map(|d| d.pow(k)).sum()
}

/// E4 = 1 + 240 sum sigma_3(n) q^n.
pub fn eisenstein4(n_max: i64) -> QSeries {
    let mut c = vec![0.0; (n_max + 1) as usize];
    c[0] = 1.0;
    for n in 1..=n_max {
        c[n as usize] = 240.0 * sigma(n, 3) as f64;
    }
    QSeries { start: 0, c }
}

/// Delta = q prod_{n >= 1} (1 - q^n)^24.
pub fn delta(n_max: i64) -> QSeries {
    let len = n_max.max(1) as usize;
    let mut euler = vec![0.0f64; len];
    euler[0] = 1.0;
    for n in 1..len {
        for i in (n..len).rev() {
            euler[i] -= euler[i - n];
        }
    }
    let eta = QSeries { start: 0, c: euler };
    let mut p = QSeries::one();
    for _ in 0..24 {
        p = p.mul(&eta, (len - 1) as i64);
    }
    QSeries { start: 1, c: p.c }
}

/// j = E4^3 / Delta = q^{-1} + 744 + 196884 q + ...
pub fn j_invariant(n_max: i64) -> QSeries {
    let e4 = eisenstein4(n_max + 1);
    let e43 = e4.mul(&e4, n_max + 1).mul(&e4, n_max + 1);
    let dinv = delta(n_max + 3).inverse(n_max);
    let mut out = e43.mul(&dinv, n_max);
    out.truncate(n_max);
    out
}

/// Faber basis element J_m = q^{-m} + 0 + O(q) (J_0 = 1).
pub fn faber(m: u32, n_max: i64) -> QSeries {
    if m == 0 {
        return QSeries::one();
    }
    let work = n_max + m as i64 + 1;
    let j1 = j_invariant(work).add_scaled(&QSeries::one(), -744.0);
    let mut basis: Vec<QSeries> = vec![QSeries::one(), j1.clone()];
    for k in 2..=m {
        let mut p = basis[(k - 1) as usize].mul(&j1, work);
        for t in (0..k).rev() {
            let coeff = p.coeff(-(t as i64));
            if coeff != 0.0 {
                p = p.add_scaled(&basis[t as usize], -coeff);
            }
        }
        p.truncate(work);
        basis.push(p);
    }
    let mut out = basis.swap_remove(m as usize);
    out.truncate(n_max);
    out
}

/// Wrap a scalar q-series as a trivial-representation Fourier expansion.
pub fn qseries_to_expansion(s: &QSeries, weight: HalfInt, dual: bool) -> FourierExpansion {
    let growth = if s.start < 0 { Growth::Exponential } else { Growth::Moderate };
    let mut f = FourierExpansion::new(weight, dual, 1, growth);
    for (i, &a) in s.c.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let n = s.start + i as i64;
        f.set(Rat::from_integer(n), vec![VProfile::constant(C64::new(a, 0.0))]);
    }
    f
}

/// The cusp form Delta as an expansion (weight 12, trivial rep).
pub fn delta_expansion(n_max: i64) -> FourierExpansion {
    qseries_to_expansion(&delta(n_max), HalfInt::int(12), false)
}
