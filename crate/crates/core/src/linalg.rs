//! Small dense linear algebra: symmetric eigenvalues (Jacobi), Cholesky,
//! exact integer determinant/adjugate (Bareiss) and Smith normal form.
//! Lattice ranks here are tiny, so simplicity beats asymptotics.

use alloc::{vec, vec::Vec};

use crate::{Error, Result};

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn sym_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for _sweep in 0..60 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i][j] * m[i][j];
            }
        }
        if off < 1e-28 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = if theta >= 0.0 {
                    1.0 / (theta + libm::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + libm::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i][i]).collect()
}

/// Cholesky factor L (lower triangular, A = L L^T); None if not positive definite.
pub fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i][j] = libm::sqrt(s);
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

fn checked_mul(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b).ok_or(Error::Overflow)
}

/// Exact determinant of an integer matrix (fraction-free Bareiss).
pub fn int_det(a: &[Vec<i64>]) -> Result<i128> {
    let n = a.len();
    let mut m: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if m[k][k] == 0 {
            let swap = (k + 1..n).find(|&r| m[r][k] != 0);
            match swap {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return Ok(0),
            }
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                let t = checked_mul(m[i][j], m[k][k])? - checked_mul(m[i][k], m[k][j])?;
                m[i][j] = t / prev;
            }
            m[i][k] = 0;
        }
        prev = m[k][k];
    }
    Ok(sign * m[n - 1][n - 1])
}

/// Smith normal form of an integer matrix: returns (d, v) with
/// u * a * v = diag(d) for some unimodular u, and v unimodular.
/// Only the elementary divisors and the right transform are needed here.
pub fn smith_normal_form(a: &[Vec<i64>]) -> Result<(Vec<i128>, Vec<Vec<i128>>)> {
    let n = a.len();
    let mut m: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut v: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1 } else { 0 }).collect())
        .collect();

    fn swap_cols(m: &mut [Vec<i128>], v: &mut [Vec<i128>], a: usize, b: usize) {
        for row in m.iter_mut() {
            row.swap(a, b);
        }
        for row in v.iter_mut() {
            row.swap(a, b);
        }
    }
    fn add_col(m: &mut [Vec<i128>], v: &mut [Vec<i128>], src: usize, dst: usize, f: i128) -> Result<()> {
        for row in m.iter_mut() {
            row[dst] = row[dst].checked_add(checked_mul(row[src], f)?).ok_or(Error::Overflow)?;
        }
        for row in v.iter_mut() {
            row[dst] = row[dst].checked_add(checked_mul(row[src], f)?).ok_or(Error::Overflow)?;
        }
        Ok(())
    }

    let mut t = 0;
    while t < n {
        // find a pivot in the submatrix
        let mut piv: Option<(usize, usize)> = None;
        let mut best = i128::MAX;
        for i in t..n {
            for j in t..n {
                if m[i][j] != 0 && m[i][j].abs() < best {
                    best = m[i][j].abs();
                    piv = Some((i, j));
                }
            }
        }
        let (pi, pj) = match piv {
            Some(p) => p,
            None => break,
        };
        m.swap(t, pi);
        swap_cols(&mut m, &mut v, t, pj);

        let mut dirty = true;
        let mut guard = 0;
        while dirty {
            guard += 1;
            if guard > 10_000 {
                return Err(Error::Overflow);
            }
            dirty = false;
            // clear the row with column ops
            for j in (t + 1)..n {
                if m[t][j] != 0 {
                    let f = -(m[t][j] / m[t][t]);
                    add_col(&mut m, &mut v, t, j, f)?;
                    if m[t][j] != 0 {
                        swap_cols(&mut m, &mut v, t, j);
                        dirty = true;
                    }
                }
            }
            // clear the column with row ops (no tracking needed)
            for i in (t + 1)..n {
                if m[i][t] != 0 {
                    let f = m[i][t] / m[t][t];
                    for j in 0..n {
                        let s = checked_mul(m[t][j], f)?;
                        m[i][j] -= s;
                    }
                    if m[i][t] != 0 {
                        m.swap(t, i);
                        dirty = true;
                    }
                }
            }
        }
        t += 1;
    }

    // the quotient Z^n / (A V-basis) is now read off the diagonal; a divisor
    // chain is not needed for coset enumeration, so the diagonal is kept as-is
    let d: Vec<i128> = (0..n).map(|i| m[i][i].abs()).collect();
    Ok((d, v))
}
