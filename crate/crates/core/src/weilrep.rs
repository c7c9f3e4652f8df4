//! Mp2(Z), the Weil representation on C[L'/L] and its dual, the slash
//! operator, and height-bounded coset enumeration for Gamma_infty \ Gamma.

use alloc::sync::Arc;
use alloc::{vec, vec::Vec};

use num_integer::Integer;
use num_traits::Zero;

use crate::lattice::DiscriminantGroup;
use crate::{e_rat, C64, Error, Rat, Result};

/// Half-integer weight k = numerator/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);
    pub fn int(n: i32) -> Self {
        HalfInt(2 * n)
    }
    pub fn half(n: i32) -> Self {
        HalfInt(n)
    }
    /// 2k as an integer.
    pub fn twice(self) -> i32 {
        self.0
    }
    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl core::ops::Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}
impl core::ops::Add for HalfInt {
    type Output = HalfInt;
    fn add(self, o: HalfInt) -> HalfInt {
        HalfInt(self.0 + o.0)
    }
}
impl core::ops::Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, o: HalfInt) -> HalfInt {
        HalfInt(self.0 - o.0)
    }
}

/// Element of Mp2(Z): an SL2(Z) matrix with a chosen square root of c tau + d.
/// `branch = false` selects the principal root.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MpElement {
    pub m: [[i64; 2]; 2],
    pub branch: bool,
}

/// Word letters for the generator decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WordAtom {
    S,
    /// T^n
    T(i64),
    /// Z^2 = (Id, -1)
    Z2,
}

const TEST_TAU: C64 = C64::new(0.1234567, 1.0789123);

impl MpElement {
    pub fn one() -> Self {
        MpElement { m: [[1, 0], [0, 1]], branch: false }
    }
    pub fn s() -> Self {
        MpElement { m: [[0, -1], [1, 0]], branch: false }
    }
    pub fn t_pow(n: i64) -> Self {
        MpElement { m: [[1, n], [0, 1]], branch: false }
    }
    /// Z = S^2 = (-Id, i).
    pub fn z() -> Self {
        MpElement { m: [[-1, 0], [0, -1]], branch: false }
    }
    /// Z^2 = (Id, -1).
    pub fn z2() -> Self {
        MpElement { m: [[1, 0], [0, 1]], branch: true }
    }

    pub fn a(&self) -> i64 {
        self.m[0][0]
    }
    pub fn b(&self) -> i64 {
        self.m[0][1]
    }
    pub fn c(&self) -> i64 {
        self.m[1][0]
    }
    pub fn d(&self) -> i64 {
        self.m[1][1]
    }

    /// Moebius action on the upper half plane.
    pub fn act(&self, tau: C64) -> C64 {
        let num = C64::new(self.a() as f64, 0.0) * tau + C64::new(self.b() as f64, 0.0);
        let den = C64::new(self.c() as f64, 0.0) * tau + C64::new(self.d() as f64, 0.0);
        num / den
    }

    /// The chosen square root phi(tau) of c tau + d.
    pub fn phi(&self, tau: C64) -> C64 {
        let base = C64::new(self.c() as f64, 0.0) * tau + C64::new(self.d() as f64, 0.0);
        let s = base.sqrt();
        if self.branch {
            -s
        } else {
            s
        }
    }

    /// phi(tau)^{-2k} with the branch fixed by log phi = Log(c tau + d)/2 + i pi [branch].
    pub fn phi_pow_neg2k(&self, k: HalfInt, tau: C64) -> C64 {
        let base = C64::new(self.c() as f64, 0.0) * tau + C64::new(self.d() as f64, 0.0);
        if !self.branch && k.twice() % 2 == 0 {
            // integer weight on the principal branch: a plain integer power
            let p = -k.twice() / 2;
            return int_pow(base, p);
        }
        let log_phi = 0.5 * base.ln()
            + C64::new(0.0, if self.branch { core::f64::consts::PI } else { 0.0 });
        (-C64::new(k.as_f64() * 2.0, 0.0) * log_phi).exp()
    }

    /// Group law (gamma1, phi1)(gamma2, phi2) = (gamma1 gamma2, phi1(gamma2 tau) phi2(tau)).
    pub fn mul(&self, other: &MpElement) -> MpElement {
        let mut m = [[0i64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let mut acc: i128 = 0;
                for l in 0..2 {
                    acc += self.m[i][l] as i128 * other.m[l][j] as i128;
                }
                m[i][j] = acc as i64;
            }
        }
        let want = self.phi(other.act(TEST_TAU)) * other.phi(TEST_TAU);
        let principal = MpElement { m, branch: false }.phi(TEST_TAU);
        let branch = (want / principal).re < 0.0;
        MpElement { m, branch }
    }

    pub fn inverse(&self) -> MpElement {
        let m = [[self.d(), -self.b()], [-self.c(), self.a()]];
        let cand = MpElement { m, branch: false };
        if self.mul(&cand) == MpElement::one() {
            cand
        } else {
            MpElement { m, branch: true }
        }
    }

    /// Evaluate a generator word left to right.
    pub fn from_word(word: &[WordAtom]) -> MpElement {
        let mut acc = MpElement::one();
        for atom in word {
            let g = match atom {
                WordAtom::S => MpElement::s(),
                WordAtom::T(n) => MpElement::t_pow(*n),
                WordAtom::Z2 => MpElement::z2(),
            };
            acc = acc.mul(&g);
        }
        acc
    }
}

/// Factor (gamma, branch) into S, T powers and Z^2, O(log |entries|) letters.
pub fn mp_decompose(gamma: [[i64; 2]; 2], branch: bool) -> Result<Vec<WordAtom>> {
    let det = gamma[0][0] as i128 * gamma[1][1] as i128 - gamma[0][1] as i128 * gamma[1][0] as i128;
    if det != 1 {
        return Err(Error::NotUnimodular);
    }
    let (mut a, mut b, mut c, mut d) = (gamma[0][0], gamma[0][1], gamma[1][0], gamma[1][1]);
    let mut word: Vec<WordAtom> = Vec::new();
    while c != 0 {
        let q = a.div_euclid(c);
        // gamma = T^q S * (S^{-1} T^{-q} gamma); push the prefix
        word.push(WordAtom::T(q));
        word.push(WordAtom::S);
        let (na, nb, nc, nd) = (c, d, q * c - a, q * d - b);
        a = na;
        b = nb;
        c = nc;
        d = nd;
    }
    if a == 1 {
        if b != 0 {
            word.push(WordAtom::T(b));
        }
    } else {
        // a = d = -1: -T^{-b} = S^2 T^{-b}
        word.push(WordAtom::S);
        word.push(WordAtom::S);
        if b != 0 {
            word.push(WordAtom::T(-b));
        }
    }
    let got = MpElement::from_word(&word);
    debug_assert_eq!(got.m, gamma);
    if got.branch != branch {
        word.push(WordAtom::Z2);
    }
    Ok(word)
}

/// Element of S(L) (coefficients on the basis phi_mu) or its dual.
#[derive(Debug, Clone, PartialEq)]
pub struct SchwartzVector {
    pub coords: Vec<C64>,
    pub dual: bool,
}

impl SchwartzVector {
    pub fn zero(dim: usize, dual: bool) -> Self {
        SchwartzVector { coords: vec![C64::zero(); dim], dual }
    }
    pub fn basis(dim: usize, idx: usize, dual: bool) -> Self {
        let mut v = Self::zero(dim, dual);
        v.coords[idx] = C64::new(1.0, 0.0);
        v
    }
    pub fn dim(&self) -> usize {
        self.coords.len()
    }
    pub fn scale(&self, c: C64) -> Self {
        SchwartzVector { coords: self.coords.iter().map(|&x| c * x).collect(), dual: self.dual }
    }
    pub fn add(&self, o: &SchwartzVector) -> Self {
        SchwartzVector {
            coords: self.coords.iter().zip(&o.coords).map(|(&x, &y)| x + y).collect(),
            dual: self.dual,
        }
    }
    /// Canonical bilinear contraction S(L)^vee (x) S(L) -> C.
    pub fn dot(&self, o: &SchwartzVector) -> C64 {
        self.coords.iter().zip(&o.coords).map(|(&x, &y)| x * y).sum()
    }
    /// Hermitian pairing <v, w>, conjugate-linear in w.
    pub fn herm(&self, o: &SchwartzVector) -> C64 {
        self.coords.iter().zip(&o.coords).map(|(&x, &y)| x * y.conj()).sum()
    }
    /// The functional <., v>: sends phi_mu to the conjugated coefficient.
    pub fn conj_to_dual(&self) -> SchwartzVector {
        SchwartzVector { coords: self.coords.iter().map(|x| x.conj()).collect(), dual: !self.dual }
    }
    pub fn norm_inf(&self) -> f64 {
        self.coords.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }
}

/// The Weil representation rho_L on S(L), with generator matrices built from
/// the exact rational phase data of the discriminant group. Matrices are
/// computed once per (discriminant group, signature) and shared read-only.
#[derive(Debug, Clone)]
pub struct WeilRep {
    pub disc: Arc<DiscriminantGroup>,
    pub signature: (usize, usize),
    pub rho_t: Vec<C64>,
    pub rho_s: Vec<Vec<C64>>,
    /// Use the conjugate eighth-root normalization (comparison switch).
    pub conj_sigma: bool,
}

impl WeilRep {
    pub fn new(disc: Arc<DiscriminantGroup>, signature: (usize, usize)) -> Self {
        Self::with_sigma(disc, signature, false)
    }

    pub fn with_sigma(
        disc: Arc<DiscriminantGroup>,
        signature: (usize, usize),
        conj_sigma: bool,
    ) -> Self {
        let n = disc.dim();
        let rho_t: Vec<C64> = disc.q_vals.iter().map(|&q| e_rat(q)).collect();
        let (p, q) = signature;
        let mut sig8 = Rat::new(q as i64 - p as i64, 8);
        if conj_sigma {
            sig8 = -sig8;
        }
        let sigma = e_rat(sig8);
        let scale = 1.0 / libm::sqrt(n as f64);
        let rho_s: Vec<Vec<C64>> = (0..n)
            .map(|mu| {
                (0..n).map(|nu| sigma * scale * e_rat(-disc.b_vals[mu][nu])).collect()
            })
            .collect();
        WeilRep { disc, signature, rho_t, rho_s, conj_sigma }
    }

    pub fn dim(&self) -> usize {
        self.disc.dim()
    }

    /// (-1)^{q-p}: the scalar by which Z^2 acts.
    pub fn z2_sign(&self) -> f64 {
        if (self.signature.0 as i64 - self.signature.1 as i64) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// 2k = p - q mod 2 is required for nonzero invariant functions.
    pub fn parity_ok(&self, k: HalfInt) -> bool {
        (k.twice() - (self.signature.0 as i32 - self.signature.1 as i32)).rem_euclid(2) == 0
    }

    // S(L)-tagged coefficient vectors transform by the conjugates of the
    // stored generator matrices, dual-tagged ones by the matrices themselves;
    // this makes the canonical bilinear contraction of an S(L)-valued series
    // against a theta function invariant, and matches the classical theta
    // transformation law (theta components transform by rho(T) = e(Q)).
    fn apply_atom(&self, atom: WordAtom, v: &mut [C64], dual: bool) {
        match atom {
            WordAtom::S => {
                let n = v.len();
                let mut out = vec![C64::zero(); n];
                for mu in 0..n {
                    let mut acc = C64::zero();
                    for nu in 0..n {
                        let m = self.rho_s[mu][nu];
                        let m = if dual { m } else { m.conj() };
                        acc += m * v[nu];
                    }
                    out[mu] = acc;
                }
                v.copy_from_slice(&out);
            }
            WordAtom::T(k) => {
                for (mu, x) in v.iter_mut().enumerate() {
                    let phase = e_rat(crate::Rat::from_integer(k) * self.disc.q_vals[mu]);
                    let phase = if dual { phase } else { phase.conj() };
                    *x *= phase;
                }
            }
            WordAtom::Z2 => {
                let s = self.z2_sign();
                for x in v.iter_mut() {
                    *x *= s;
                }
            }
        }
    }

    /// rho(g) v (or rho^vee(g) v when v is dual-tagged).
    pub fn apply(&self, g: &MpElement, v: &SchwartzVector) -> Result<SchwartzVector> {
        if v.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.dim() });
        }
        let word = mp_decompose(g.m, g.branch)?;
        let mut coords = v.coords.clone();
        for atom in word.iter().rev() {
            self.apply_atom(*atom, &mut coords, v.dual);
        }
        Ok(SchwartzVector { coords, dual: v.dual })
    }

    /// rho(g)^{-1} v.
    pub fn apply_inverse(&self, g: &MpElement, v: &SchwartzVector) -> Result<SchwartzVector> {
        self.apply(&g.inverse(), v)
    }

    /// Dense matrix of rho(g) (or the dual), mainly for relation checks.
    pub fn matrix(&self, g: &MpElement, dual: bool) -> Result<Vec<Vec<C64>>> {
        let n = self.dim();
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
        for j in 0..n {
            let e = SchwartzVector { coords: basis_coords(n, j), dual };
            cols.push(self.apply(g, &e)?.coords);
        }
        Ok((0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect())
    }

    /// (1/4) sum over the four lifts of +-Id of the slashed constant seed.
    /// This is the projection onto the Z-invariant span (the phi-tilde vector).
    pub fn symmetrized_seed(&self, k: HalfInt, v: &SchwartzVector) -> Result<SchwartzVector> {
        let elems = [
            MpElement::one(),
            MpElement::z2(),
            MpElement::z(),
            MpElement { m: [[-1, 0], [0, -1]], branch: true },
        ];
        let mut acc = SchwartzVector::zero(v.dim(), v.dual);
        for g in &elems {
            let factor = g.phi_pow_neg2k(k, TEST_TAU);
            let gv = self.apply_inverse(g, v)?;
            acc = acc.add(&gv.scale(factor));
        }
        Ok(acc.scale(C64::new(0.25, 0.0)))
    }
}

fn int_pow(base: C64, p: i32) -> C64 {
    let mut acc = C64::new(1.0, 0.0);
    let b = if p >= 0 { base } else { C64::new(1.0, 0.0) / base };
    for _ in 0..p.unsigned_abs() {
        acc *= b;
    }
    acc
}

fn basis_coords(n: usize, j: usize) -> Vec<C64> {
    let mut v = vec![C64::zero(); n];
    v[j] = C64::new(1.0, 0.0);
    v
}

/// Weight-k slash action (f |_k [g])(tau) = phi(tau)^{-2k} rho(g)^{-1} f(g tau).
pub fn slash(
    f: &mut dyn FnMut(C64) -> Result<SchwartzVector>,
    rep: &WeilRep,
    k: HalfInt,
    g: &MpElement,
    tau: C64,
) -> Result<SchwartzVector> {
    if !rep.parity_ok(k) {
        return Err(Error::WeightParityMismatch);
    }
    let fv = f(g.act(tau))?;
    let tv = rep.apply_inverse(g, &fv)?;
    Ok(tv.scale(g.phi_pow_neg2k(k, tau)))
}

/// Representatives of Gamma_infty \ Gamma with Im(gamma tau) >= w, one per
/// class {+-(c, d)} x {branches}; the four-element lift subgroup is handled
/// by the series via `symmetrized_seed`. For c != 0 the representative has
/// 0 <= a < c.
pub fn cosets_above_height(tau: C64, w: f64) -> Vec<MpElement> {
    let v = tau.im;
    let u = tau.re;
    let mut out = Vec::new();
    if v >= w {
        out.push(MpElement::one());
    }
    let budget = v / w;
    let cmax = libm::floor(libm::sqrt(budget.max(0.0)) / v) as i64;
    for c in 1..=cmax {
        let rad2 = budget - (c as f64 * v) * (c as f64 * v);
        if rad2 < 0.0 {
            continue;
        }
        let s = libm::sqrt(rad2);
        let lo = libm::ceil(-c as f64 * u - s - 1e-12) as i64;
        let hi = libm::floor(-c as f64 * u + s + 1e-12) as i64;
        for d in lo..=hi {
            let t1 = c as f64 * u + d as f64;
            let t2 = c as f64 * v;
            let num = t1 * t1 + t2 * t2;
            if num > budget * (1.0 + 1e-12) {
                continue;
            }
            if c.gcd(&d) != 1 {
                continue;
            }
            let (a, b) = complete_to_sl2(c, d);
            out.push(MpElement { m: [[a, b], [c, d]], branch: false });
        }
    }
    out
}

/// Given coprime (c, d), the unique (a, b) with a d - b c = 1 and 0 <= a < c.
pub fn complete_to_sl2(c: i64, d: i64) -> (i64, i64) {
    let (g, x, _y) = egcd(d, c);
    debug_assert_eq!(g, 1);
    let a = if c != 0 { x.rem_euclid(c) } else { x };
    let b = if c != 0 { (a * d - 1) / c } else { 0 };
    (a, b)
}

fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = egcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}
