use std::sync::Arc;

use rlt_core::lattice::{build_lattice, discriminant_group};
use rlt_core::weilrep::{
    cosets_above_height, mp_decompose, slash, HalfInt, MpElement, SchwartzVector, WeilRep,
    WordAtom,
};
use rlt_core::C64;

fn rep_for(gram: &[Vec<i64>]) -> Arc<WeilRep> {
    let l = build_lattice(gram).unwrap();
    let d = discriminant_group(&l).unwrap();
    Arc::new(WeilRep::new(Arc::new(d), l.signature))
}

fn fixtures() -> Vec<(&'static str, Arc<WeilRep>)> {
    vec![
        ("a1", rep_for(&[vec![2]])),
        ("a1a1", rep_for(&[vec![2, 0], vec![0, 2]])),
        (
            "d4",
            rep_for(&[
                vec![2, -1, 0, 0],
                vec![-1, 2, -1, -1],
                vec![0, -1, 2, 0],
                vec![0, -1, 0, 2],
            ]),
        ),
        (
            "uu",
            rep_for(&[
                vec![0, 1, 0, 0],
                vec![1, 0, 0, 0],
                vec![0, 0, 0, 1],
                vec![0, 0, 1, 0],
            ]),
        ),
    ]
}

fn matmul(a: &[Vec<C64>], b: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

fn mat_pow(a: &[Vec<C64>], p: usize) -> Vec<Vec<C64>> {
    let n = a.len();
    let mut acc: Vec<Vec<C64>> = (0..n)
        .map(|i| (0..n).map(|j| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect();
    for _ in 0..p {
        acc = matmul(&acc, a);
    }
    acc
}

fn max_diff(a: &[Vec<C64>], b: &[Vec<C64>]) -> f64 {
    let mut m = 0.0f64;
    for (ra, rb) in a.iter().zip(b) {
        for (&x, &y) in ra.iter().zip(rb) {
            m = m.max((x - y).norm());
        }
    }
    m
}

fn identity(n: usize) -> Vec<Vec<C64>> {
    (0..n)
        .map(|i| (0..n).map(|j| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect()
}

fn diag_t(rep: &WeilRep) -> Vec<Vec<C64>> {
    let n = rep.dim();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { rep.rho_t[i] } else { C64::new(0.0, 0.0) })
                .collect()
        })
        .collect()
}

#[test]
fn generator_relations_sub_1e12() {
    for (name, rep) in fixtures() {
        let s = rep.rho_s.clone();
        let t = diag_t(&rep);
        let n = rep.dim();
        let st = matmul(&s, &t);
        // (ST)^3 = S^2
        let r1 = max_diff(&mat_pow(&st, 3), &mat_pow(&s, 2));
        // S^8 = Id
        let r2 = max_diff(&mat_pow(&s, 8), &identity(n));
        // unitarity: S S* = Id
        let s_dag: Vec<Vec<C64>> =
            (0..n).map(|i| (0..n).map(|j| s[j][i].conj()).collect()).collect();
        let r3 = max_diff(&matmul(&s, &s_dag), &identity(n));
        // (ST)^6 = Z^2 = (-1)^{q-p} Id
        let mut zid = identity(n);
        for row in zid.iter_mut() {
            for x in row.iter_mut() {
                *x *= rep.z2_sign();
            }
        }
        let r4 = max_diff(&mat_pow(&st, 6), &zid);
        for (tag, r) in [("(ST)^3=S^2", r1), ("S^8=Id", r2), ("SS*=Id", r3), ("Z2", r4)] {
            assert!(r < 1e-12, "{name} {tag}: residual {r:e}");
        }
    }
}

#[test]
fn a1_matrices_explicit() {
    let rep = rep_for(&[vec![2]]);
    // rho(T) = diag(1, e(1/4))
    assert!((rep.rho_t[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
    assert!((rep.rho_t[1] - C64::new(0.0, 1.0)).norm() < 1e-15);
    // rho(S) = e(-1/8)/sqrt(2) [[1,1],[1,-1]]
    let phase = C64::from_polar(1.0, -2.0 * std::f64::consts::PI / 8.0) / 2.0f64.sqrt();
    let expect = [
        [phase, phase],
        [phase, -phase],
    ];
    for i in 0..2 {
        for j in 0..2 {
            assert!((rep.rho_s[i][j] - expect[i][j]).norm() < 1e-15);
        }
    }
    // rho(S)^4 = Z^2 = (-1)^{q-p} Id = -Id on A1
    let s4 = mat_pow(&rep.rho_s, 4);
    let mut neg = identity(2);
    for row in neg.iter_mut() {
        for x in row.iter_mut() {
            *x = -*x;
        }
    }
    assert!(max_diff(&s4, &neg) < 1e-14);
}

#[test]
fn conjugate_normalization_switch() {
    let l = build_lattice(&[vec![2]]).unwrap();
    let d = discriminant_group(&l).unwrap();
    let rep = WeilRep::with_sigma(Arc::new(d), l.signature, true);
    // the conjugate eighth root breaks the Z^2 constraint on A1
    let st = matmul(&rep.rho_s, &diag_t(&rep));
    let mut zid = identity(2);
    for row in zid.iter_mut() {
        for x in row.iter_mut() {
            *x *= rep.z2_sign();
        }
    }
    assert!(max_diff(&mat_pow(&st, 6), &zid) > 0.1);
}

fn random_words(seed: u64, count: usize, len: usize) -> Vec<MpElement> {
    let mut state = seed;
    let mut rand = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    (0..count)
        .map(|_| {
            let mut g = MpElement::one();
            for _ in 0..len {
                match rand() % 4 {
                    0 => g = g.mul(&MpElement::s()),
                    1 => g = g.mul(&MpElement::t_pow(1 + (rand() % 3) as i64)),
                    2 => g = g.mul(&MpElement::t_pow(-1 - (rand() % 3) as i64)),
                    _ => g = g.mul(&MpElement::z2()),
                }
            }
            g
        })
        .collect()
}

#[test]
fn product_law_at_random_tau() {
    let words = random_words(7, 10, 6);
    let mut state = 99u64;
    let mut rand = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state % 1000) as f64 / 1000.0
    };
    for pair in words.chunks(2) {
        if pair.len() < 2 {
            continue;
        }
        let (g1, g2) = (pair[0], pair[1]);
        let g12 = g1.mul(&g2);
        for _ in 0..10 {
            let tau = C64::new(rand() - 0.5, 0.3 + rand());
            let lhs = g1.phi(g2.act(tau)) * g2.phi(tau);
            let rhs = g12.phi(tau);
            assert!((lhs - rhs).norm() < 1e-12 * rhs.norm());
        }
    }
}

#[test]
fn decompose_examples_and_roundtrip() {
    // T -> [T]
    let w = mp_decompose([[1, 1], [0, 1]], false).unwrap();
    assert_eq!(w, vec![WordAtom::T(1)]);
    // S -> [.., S] evaluating back to S
    let w = mp_decompose([[0, -1], [1, 0]], false).unwrap();
    assert_eq!(MpElement::from_word(&w), MpElement::s());
    // -Id with branch phi(tau) = i is Z = S^2: check phi value at tau = i
    let z = MpElement::z();
    assert!((z.phi(C64::new(0.0, 1.0)) - C64::new(0.0, 1.0)).norm() < 1e-15);
    let w = mp_decompose([[-1, 0], [0, -1]], false).unwrap();
    let got = MpElement::from_word(&w);
    assert_eq!(got, z);
    assert_eq!(got, MpElement::s().mul(&MpElement::s()));

    for g in random_words(21, 20, 8) {
        let w = mp_decompose(g.m, g.branch).unwrap();
        assert_eq!(MpElement::from_word(&w), g, "roundtrip failed for {g:?}");
        assert!(w.len() < 64);
    }
    assert!(mp_decompose([[1, 0], [0, 2]], false).is_err());
}

#[test]
fn word_cache_reproduces_branch() {
    for g in random_words(4242, 12, 5) {
        let gi = g.inverse();
        assert_eq!(g.mul(&gi), MpElement::one());
    }
}

#[test]
fn apply_group_law_and_duality() {
    for (_, rep) in fixtures() {
        let dim = rep.dim();
        let mut state = 5u64;
        let mut rand = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 1000) as f64 / 500.0 - 1.0
        };
        for g in random_words(11, 10, 5) {
            let v = SchwartzVector {
                coords: (0..dim).map(|_| C64::new(rand(), rand())).collect(),
                dual: false,
            };
            let w = rep.apply(&g, &v).unwrap();
            let back = rep.apply_inverse(&g, &w).unwrap();
            let diff: f64 =
                v.coords.iter().zip(&back.coords).map(|(a, b)| (a - b).norm()).sum();
            assert!(diff < 1e-12, "rho(g) rho(g^-1) != id");

            // conjugate-dual compatibility: dual matrices are entrywise
            // conjugates of the S(L)-side matrices
            let m_s = rep.matrix(&g, false).unwrap();
            let m_d = rep.matrix(&g, true).unwrap();
            for i in 0..dim {
                for j in 0..dim {
                    assert!((m_s[i][j].conj() - m_d[i][j]).norm() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn slash_cocycle() {
    let rep = rep_for(&[vec![2]]);
    let k = HalfInt::half(1); // weight 1/2, parity 2k = 1 = p - q mod 2
    assert!(rep.parity_ok(k));
    let f = |tau: C64| -> rlt_core::Result<SchwartzVector> {
        Ok(SchwartzVector {
            coords: vec![
                (C64::new(0.0, 2.0 * std::f64::consts::PI) * tau).exp(),
                (C64::new(0.0, 3.0 * std::f64::consts::PI) * tau).exp() * C64::new(0.3, 0.1),
            ],
            dual: false,
        })
    };
    for pair in random_words(31, 10, 4).chunks(2) {
        if pair.len() < 2 {
            continue;
        }
        let (g1, g2) = (pair[0], pair[1]);
        let tau = C64::new(0.21, 1.37);
        // (f |[g1]) |[g2] = f |[g1 g2]
        let mut inner = |t: C64| slash(&mut { f }, &rep, k, &g1, t);
        let lhs = slash(&mut inner, &rep, k, &g2, tau).unwrap();
        let rhs = slash(&mut { f }, &rep, k, &g1.mul(&g2), tau).unwrap();
        let diff: f64 =
            lhs.coords.iter().zip(&rhs.coords).map(|(a, b)| (a - b).norm()).sum();
        assert!(diff < 1e-10, "cocycle residual {diff:e}");
    }
}

#[test]
fn slash_parity_guard() {
    let rep = rep_for(&[vec![2]]);
    // integer weight on an odd-signature form: Z^2 acts by -1
    let f = |_: C64| -> rlt_core::Result<SchwartzVector> {
        Ok(SchwartzVector::basis(2, 0, false))
    };
    let err = slash(&mut { f }, &rep, HalfInt::int(1), &MpElement::t_pow(1), C64::new(0.0, 1.0));
    assert!(err.is_err());
}

#[test]
fn slash_identity_and_t_on_constants() {
    let rep = rep_for(&[
        vec![0, 1, 0, 0],
        vec![1, 0, 0, 0],
        vec![0, 0, 0, 1],
        vec![0, 0, 1, 0],
    ]);
    let f = |_: C64| -> rlt_core::Result<SchwartzVector> {
        Ok(SchwartzVector::basis(1, 0, false))
    };
    let out = slash(&mut { f }, &rep, HalfInt::ZERO, &MpElement::t_pow(1), C64::new(0.3, 2.0))
        .unwrap();
    assert!((out.coords[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
}

#[test]
fn coset_height_examples() {
    // tau = 2i, w = 1: identity only (4c^2 + d^2 <= 2 forces c = 0)
    let cs = cosets_above_height(C64::new(0.0, 2.0), 1.0);
    assert_eq!(cs.len(), 1);
    assert_eq!(cs[0], MpElement::one());

    // tau = i, w = 1: identity and S-class (c, d) in {(0,1), (1,0)}
    let cs = cosets_above_height(C64::new(0.0, 1.0), 1.0);
    let pairs: Vec<(i64, i64)> = cs.iter().map(|g| (g.c(), g.d())).collect();
    assert_eq!(pairs.len(), 2);
    assert!(pairs.contains(&(0, 1)));
    assert!(pairs.contains(&(1, 0)));

    // tau = i, w = 3: empty
    let cs = cosets_above_height(C64::new(0.0, 1.0), 3.0);
    assert!(cs.is_empty());
}

#[test]
fn coset_count_monotone_in_w() {
    let tau = C64::new(0.17, 0.83);
    let mut last = usize::MAX;
    for w in [0.25, 0.5, 0.8, 1.0, 1.5, 3.0] {
        let n = cosets_above_height(tau, w).len();
        assert!(n <= last);
        last = n;
    }
}

#[test]
fn coset_representative_normalization() {
    for g in cosets_above_height(C64::new(0.3, 0.4), 0.3) {
        if g.c() != 0 {
            assert!(0 <= g.a() && g.a() < g.c());
            assert_eq!(g.a() * g.d() - g.b() * g.c(), 1);
        }
    }
}
