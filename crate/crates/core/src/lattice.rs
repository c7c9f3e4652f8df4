//! Even lattices, discriminant groups, majorants and lattice-point
//! enumeration. Vectors are coordinate vectors with respect to the fixed
//! lattice basis; dual vectors use rational coordinates in the same basis, so
//! the bilinear form is always x^T G y.

use alloc::collections::BTreeMap;
use alloc::{vec, vec::Vec};

use num_integer::Integer;
use num_traits::Zero;

use crate::linalg;
use crate::{rat_f64, Error, Rat, Result};

/// Even integral lattice with its Gram matrix, signature and level.
#[derive(Debug, Clone, PartialEq)]
pub struct EvenLattice {
    pub gram: Vec<Vec<i64>>,
    pub rank: usize,
    /// (p, q): counts of positive and negative eigenvalues.
    pub signature: (usize, usize),
    /// Smallest N with N*Q(x') integral for all dual vectors x'.
    pub level: i64,
    /// det(gram), nonzero.
    pub det: i128,
}

/// Validate a Gram matrix and compute the derived invariants.
pub fn build_lattice(gram: &[Vec<i64>]) -> Result<EvenLattice> {
    let n = gram.len();
    if n == 0 || gram.iter().any(|r| r.len() != n) {
        return Err(Error::NotSymmetric);
    }
    for i in 0..n {
        for j in 0..n {
            if gram[i][j] != gram[j][i] {
                return Err(Error::NotSymmetric);
            }
        }
        if gram[i][i] % 2 != 0 {
            return Err(Error::NotEven);
        }
    }
    let det = linalg::int_det(gram)?;
    if det == 0 {
        return Err(Error::Singular);
    }
    let fgram: Vec<Vec<f64>> = gram.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
    let eig = linalg::sym_eigenvalues(&fgram);
    let p = eig.iter().filter(|&&l| l > 0.0).count();
    let q = eig.iter().filter(|&&l| l < 0.0).count();
    debug_assert_eq!(p + q, n);

    // level from the dual Gram matrix G^{-1} = adj/det
    let adj = adjugate(gram)?;
    let mut level: i64 = 1;
    for i in 0..n {
        for j in 0..n {
            let num = adj[i][j];
            let den = det;
            let entry = ratio_i128(num, den)?;
            let need = if i == j { entry / Rat::from_integer(2) } else { entry };
            level = level.lcm(need.denom());
        }
    }

    Ok(EvenLattice { gram: gram.to_vec(), rank: n, signature: (p, q), level, det })
}

fn ratio_i128(num: i128, den: i128) -> Result<Rat> {
    let g = gcd_i128(num, den);
    let (n, d) = if g == 0 { (0, 1) } else { (num / g, den / g) };
    let (n, d) = if d < 0 { (-n, -d) } else { (n, d) };
    let n: i64 = n.try_into().map_err(|_| Error::Overflow)?;
    let d: i64 = d.try_into().map_err(|_| Error::Overflow)?;
    Ok(Rat::new(n, d))
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn adjugate(gram: &[Vec<i64>]) -> Result<Vec<Vec<i128>>> {
    let n = gram.len();
    let mut adj = vec![vec![0i128; n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<Vec<i64>> = (0..n)
                .filter(|&r| r != j)
                .map(|r| (0..n).filter(|&c| c != i).map(|c| gram[r][c]).collect())
                .collect();
            let d = if n == 1 { 1 } else { linalg::int_det(&minor)? };
            adj[i][j] = if (i + j) % 2 == 0 { d } else { -d };
        }
    }
    Ok(adj)
}

impl EvenLattice {
    /// Bilinear form (x, y) = x^T G y for rational coordinate vectors.
    pub fn bilin_rat(&self, x: &[Rat], y: &[Rat]) -> Rat {
        let mut acc = Rat::zero();
        for i in 0..self.rank {
            for j in 0..self.rank {
                acc += x[i] * Rat::from_integer(self.gram[i][j]) * y[j];
            }
        }
        acc
    }

    /// Q(x) = (x, x)/2, exact.
    pub fn quad_rat(&self, x: &[Rat]) -> Rat {
        self.bilin_rat(x, x) / Rat::from_integer(2)
    }

    /// Bilinear form on float coordinates.
    pub fn bilin_f64(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.rank {
            for j in 0..self.rank {
                acc += x[i] * self.gram[i][j] as f64 * y[j];
            }
        }
        acc
    }

    /// Q(x) on float coordinates.
    pub fn quad_f64(&self, x: &[f64]) -> f64 {
        0.5 * self.bilin_f64(x, x)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.signature.1 == 0
    }

    /// Stable content hash of the Gram matrix (cache keys, file headers).
    pub fn content_hash(&self) -> u64 {
        let mut h = 0xcbf29ce484222325u64;
        for row in &self.gram {
            for &x in row {
                for b in x.to_le_bytes() {
                    h ^= b as u64;
                    h = h.wrapping_mul(0x100000001b3);
                }
            }
        }
        h
    }
}

/// The finite quadratic module L'/L with exact Q mod 1 and bilinear data.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminantGroup {
    pub order: u64,
    /// Canonical coset representatives, coordinates in [0, 1), sorted lex.
    pub reps: Vec<Vec<Rat>>,
    /// Q(mu) mod 1 per coset.
    pub q_vals: Vec<Rat>,
    /// (mu, nu) mod 1 per coset pair.
    pub b_vals: Vec<Vec<Rat>>,
    /// Index of -mu per coset.
    pub neg: Vec<usize>,
    index: BTreeMap<Vec<Rat>, usize>,
}

fn frac_mod1(x: Rat) -> Rat {
    let f = x.floor();
    x - f
}

/// Enumerate L'/L from the Smith normal form of the Gram matrix.
pub fn discriminant_group(lat: &EvenLattice) -> Result<DiscriminantGroup> {
    let n = lat.rank;
    let (d, v) = linalg::smith_normal_form(&lat.gram)?;
    let mut reps: Vec<Vec<Rat>> = Vec::new();
    let mut idx = vec![0i128; n];
    loop {
        // rep = sum_i (idx_i / d_i) * V[:, i], reduced mod 1
        let mut rep = vec![Rat::zero(); n];
        for i in 0..n {
            if d[i] <= 1 {
                continue;
            }
            let coeff = ratio_i128(idx[i], d[i])?;
            for r in 0..n {
                let vi: i64 = v[r][i].try_into().map_err(|_| Error::Overflow)?;
                rep[r] += coeff * Rat::from_integer(vi);
            }
        }
        reps.push(rep.into_iter().map(frac_mod1).collect());

        // increment the mixed-radix counter
        let mut k = 0;
        loop {
            if k == n {
                break;
            }
            idx[k] += 1;
            if idx[k] < d[k].max(1) {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    reps.sort();
    reps.dedup();
    let order = reps.len() as u64;
    if order as i128 != lat.det.abs() {
        return Err(Error::Overflow);
    }

    let q_vals: Vec<Rat> = reps.iter().map(|r| frac_mod1(lat.quad_rat(r))).collect();
    let b_vals: Vec<Vec<Rat>> = reps
        .iter()
        .map(|a| reps.iter().map(|b| frac_mod1(lat.bilin_rat(a, b))).collect())
        .collect();
    let index: BTreeMap<Vec<Rat>, usize> =
        reps.iter().enumerate().map(|(i, r)| (r.clone(), i)).collect();
    let neg: Vec<usize> = reps
        .iter()
        .map(|r| {
            let m: Vec<Rat> = r.iter().map(|&x| frac_mod1(-x)).collect();
            index[&m]
        })
        .collect();

    Ok(DiscriminantGroup { order, reps, q_vals, b_vals, neg, index })
}

impl DiscriminantGroup {
    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    /// Index of the coset containing the rational vector x.
    pub fn coset_index(&self, x: &[Rat]) -> Option<usize> {
        let key: Vec<Rat> = x.iter().map(|&t| frac_mod1(t)).collect();
        self.index.get(&key).copied()
    }

    /// Indices mu with Q(mu) = m mod 1.
    pub fn cosets_with_norm(&self, m: Rat) -> Vec<usize> {
        let target = frac_mod1(m);
        (0..self.dim()).filter(|&i| self.q_vals[i] == target).collect()
    }
}

/// A point of the Grassmannian of negative-definite q-planes, stored as an
/// orthonormal frame for -(,) together with the positive-definite majorant.
#[derive(Debug, Clone)]
pub struct MajorantPoint {
    /// Orthonormal basis of z w.r.t. -(,).
    pub basis: Vec<Vec<f64>>,
    /// Symmetric positive definite M with Q_z(x) = x^T M x / 2.
    pub majorant: Vec<Vec<f64>>,
}

/// Build the majorant Q_z = Q + R0(., z) from a spanning set of the plane z.
pub fn majorant(lat: &EvenLattice, basis_z: &[Vec<f64>]) -> Result<MajorantPoint> {
    let n = lat.rank;
    let q = lat.signature.1;
    if basis_z.len() != q || basis_z.iter().any(|v| v.len() != n) {
        return Err(Error::WrongDimension { expected: q, got: basis_z.len() });
    }
    // Gram-Schmidt with respect to -(,)
    let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(q);
    for v in basis_z {
        let mut w = v.clone();
        for u in &ortho {
            let c = -lat.bilin_f64(&w, u); // <w, u> w.r.t. -(,), |u| = 1
            for i in 0..n {
                w[i] -= c * u[i];
            }
        }
        let norm2 = -lat.bilin_f64(&w, &w);
        if norm2 <= 1e-10 {
            return Err(Error::NotNegativeDefinite);
        }
        let s = 1.0 / libm::sqrt(norm2);
        for x in w.iter_mut() {
            *x *= s;
        }
        ortho.push(w);
    }
    // M = G + 2 sum (G u)(G u)^T
    let mut m: Vec<Vec<f64>> = lat.gram.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
    for u in &ortho {
        let gu: Vec<f64> = (0..n).map(|i| (0..n).map(|j| lat.gram[i][j] as f64 * u[j]).sum()).collect();
        for i in 0..n {
            for j in 0..n {
                m[i][j] += 2.0 * gu[i] * gu[j];
            }
        }
    }
    let eig = linalg::sym_eigenvalues(&m);
    if eig.iter().any(|&l| l <= 0.0) {
        return Err(Error::NotNegativeDefinite);
    }
    Ok(MajorantPoint { basis: ortho, majorant: m })
}

impl MajorantPoint {
    /// R0(x, z) = Q_z(x) - Q(x) = sum_i (x, u_i)^2 >= 0.
    pub fn r_zero(&self, lat: &EvenLattice, x: &[f64]) -> f64 {
        self.basis.iter().map(|u| { let t = lat.bilin_f64(x, u); t * t }).sum()
    }

    /// Positive definite majorant value Q_z(x).
    pub fn q_z(&self, x: &[f64]) -> f64 {
        let n = x.len();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += x[i] * self.majorant[i][j] * x[j];
            }
        }
        0.5 * acc
    }
}

/// What to enumerate in a coset mu + L.
pub enum Target<'a> {
    /// All x with Q(x) = m; definite lattices only.
    Norm(Rat),
    /// All x with Q_z(x) <= bound, optionally filtered to Q(x) = norm.
    MajorantBall { z: &'a MajorantPoint, bound: f64, norm: Option<Rat> },
}

/// Default cap on enumeration output size.
pub const ENUM_CAP: u64 = 20_000_000;

/// Exhaustively list the vectors of a coset meeting the target.
///
/// Fincke-Pohst branch-and-bound on the Cholesky factor of the definite form;
/// output is sorted lexicographically by coordinates.
pub fn enumerate_coset_vectors(
    lat: &EvenLattice,
    coset: &[Rat],
    target: Target<'_>,
    cap: u64,
) -> Result<Vec<Vec<Rat>>> {
    let n = lat.rank;
    let center: Vec<f64> = coset.iter().map(|&r| rat_f64(r)).collect();
    let (form, bound2, norm_filter): (Vec<Vec<f64>>, f64, Option<Rat>) = match target {
        Target::Norm(m) => {
            if !lat.is_positive_definite() {
                return Err(Error::IndefiniteWithoutMajorant);
            }
            if m < Rat::zero() {
                return Ok(Vec::new());
            }
            let g: Vec<Vec<f64>> =
                lat.gram.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
            (g, 2.0 * rat_f64(m), Some(m))
        }
        Target::MajorantBall { z, bound, norm } => {
            if bound < 0.0 {
                return Ok(Vec::new());
            }
            (z.majorant.clone(), 2.0 * bound, norm)
        }
    };

    let chol = linalg::cholesky(&form).ok_or(Error::NotNegativeDefinite)?;
    // volume-based output estimate against the cap
    let det: f64 = chol.iter().enumerate().map(|(i, r)| r[i] * r[i]).product();
    let vol = ball_volume(n) * libm::pow(bound2.max(0.0), n as f64 / 2.0) / libm::sqrt(det);
    let estimate = (2.0 * vol + libm::pow(3.0, n as f64)) as u64;
    if estimate > cap {
        return Err(Error::BoundTooLarge { estimated: estimate, cap });
    }

    // R = L^T, enumerate from the last coordinate down
    let r: Vec<Vec<f64>> = {
        let mut r = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..=i {
                r[j][i] = chol[i][j];
            }
        }
        r
    };
    let fuzz = bound2 * 1e-12 + 1e-9;
    let mut out: Vec<Vec<i64>> = Vec::new();
    let mut y = vec![0i64; n];
    fp_recurse(&r, &center, bound2 + fuzz, n, &mut y, &mut out);

    let mut vecs: Vec<Vec<Rat>> = out
        .into_iter()
        .map(|yy| {
            (0..n)
                .map(|i| coset[i] + Rat::from_integer(yy[i]))
                .collect::<Vec<Rat>>()
        })
        .filter(|x| match norm_filter {
            Some(m) => lat.quad_rat(x) == m,
            None => true,
        })
        .collect();
    vecs.sort();
    Ok(vecs)
}

fn ball_volume(n: usize) -> f64 {
    // pi^{n/2} / Gamma(n/2 + 1)
    let half = n as f64 / 2.0;
    libm::exp(half * libm::log(core::f64::consts::PI) - libm::lgamma(half + 1.0))
}

fn fp_recurse(
    r: &[Vec<f64>],
    center: &[f64],
    rem: f64,
    level: usize,
    y: &mut [i64],
    out: &mut Vec<Vec<i64>>,
) {
    if level == 0 {
        out.push(y.to_vec());
        return;
    }
    let i = level - 1;
    // t = sum_{j > i} R[i][j] (y_j + c_j)
    let mut t = 0.0;
    for j in level..r.len() {
        t += r[i][j] * (y[j] as f64 + center[j]);
    }
    let rii = r[i][i];
    let c = center[i] + t / rii;
    let half_width = libm::sqrt(rem.max(0.0)) / rii;
    let lo = libm::ceil(-c - half_width - 1e-12) as i64;
    let hi = libm::floor(-c + half_width + 1e-12) as i64;
    for yi in lo..=hi {
        let lin = rii * (yi as f64 + center[i]) + t;
        let contrib = lin * lin;
        if contrib <= rem {
            y[i] = yi;
            fp_recurse(r, center, rem - contrib, i, y, out);
        }
    }
    y[i] = 0;
}
