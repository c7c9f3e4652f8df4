use rlt_core::lattice::{
    build_lattice, discriminant_group, enumerate_coset_vectors, majorant, Target, ENUM_CAP,
};
use rlt_core::{Error, Rat};

fn a1() -> Vec<Vec<i64>> {
    vec![vec![2]]
}
fn a1a1() -> Vec<Vec<i64>> {
    vec![vec![2, 0], vec![0, 2]]
}
fn d4() -> Vec<Vec<i64>> {
    vec![
        vec![2, -1, 0, 0],
        vec![-1, 2, -1, -1],
        vec![0, -1, 2, 0],
        vec![0, -1, 0, 2],
    ]
}
fn uu() -> Vec<Vec<i64>> {
    vec![
        vec![0, 1, 0, 0],
        vec![1, 0, 0, 0],
        vec![0, 0, 0, 1],
        vec![0, 0, 1, 0],
    ]
}

/// Cofactor-expansion determinant, the independent linear-algebra oracle.
fn det_oracle(m: &[Vec<i64>]) -> i64 {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    let mut acc = 0i64;
    for j in 0..n {
        let minor: Vec<Vec<i64>> = (1..n)
            .map(|r| (0..n).filter(|&c| c != j).map(|c| m[r][c]).collect())
            .collect();
        let s = if j % 2 == 0 { 1 } else { -1 };
        acc += s * m[0][j] * det_oracle(&minor);
    }
    acc
}

/// Naive box-scan counting oracle: #(x in mu + Z^n with Q(x) = m).
fn box_count(gram: &[Vec<i64>], coset: &[Rat], m: Rat, radius: i64) -> usize {
    let n = gram.len();
    let lat = build_lattice(gram).unwrap();
    let mut idx = vec![-radius; n];
    let mut count = 0usize;
    loop {
        let x: Vec<Rat> = (0..n).map(|i| coset[i] + Rat::from_integer(idx[i])).collect();
        if lat.quad_rat(&x) == m {
            count += 1;
        }
        let mut k = 0;
        while k < n {
            idx[k] += 1;
            if idx[k] <= radius {
                break;
            }
            idx[k] = -radius;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    count
}

fn zero_coset(n: usize) -> Vec<Rat> {
    vec![Rat::from_integer(0); n]
}

#[test]
fn build_examples() {
    let l = build_lattice(&a1()).unwrap();
    assert_eq!(l.signature, (1, 0));
    assert_eq!(l.level, 4);

    let l = build_lattice(&uu()).unwrap();
    assert_eq!(l.signature, (2, 2));
    assert_eq!(l.level, 1);
    assert_eq!(l.det.unsigned_abs(), 1);

    let l = build_lattice(&d4()).unwrap();
    assert_eq!(l.signature, (4, 0));
    assert_eq!(l.det.unsigned_abs() as i64, det_oracle(&d4()).unsigned_abs() as i64);
    assert_eq!(l.det.unsigned_abs(), 4);
}

#[test]
fn build_errors() {
    assert_eq!(build_lattice(&[vec![3]]).unwrap_err(), Error::NotEven);
    assert_eq!(
        build_lattice(&[vec![2, 1], vec![2, 2]]).unwrap_err(),
        Error::NotSymmetric
    );
    assert_eq!(
        build_lattice(&[vec![2, 2], vec![2, 2]]).unwrap_err(),
        Error::Singular
    );
}

#[test]
fn discriminant_examples() {
    let l = build_lattice(&a1()).unwrap();
    let d = discriminant_group(&l).unwrap();
    assert_eq!(d.order, 2);
    let mut qs: Vec<Rat> = d.q_vals.clone();
    qs.sort();
    assert_eq!(qs, vec![Rat::new(0, 1), Rat::new(1, 4)]);

    let l = build_lattice(&uu()).unwrap();
    let d = discriminant_group(&l).unwrap();
    assert_eq!(d.order, 1);

    // dual-coset scan oracle for D4: reps are x = G^{-1} m reduced mod 1
    let l = build_lattice(&d4()).unwrap();
    let d = discriminant_group(&l).unwrap();
    assert_eq!(d.order, 4);
    for (i, &q) in d.q_vals.iter().enumerate() {
        if d.reps[i].iter().all(|r| *r == Rat::from_integer(0)) {
            assert_eq!(q, Rat::from_integer(0));
        } else {
            // nontrivial cosets have Q = 1/2 or 3/4 mod 1; the scan gives 1/2
            assert_eq!(q, Rat::new(1, 2));
        }
    }
}

#[test]
fn discriminant_invariants() {
    for gram in [a1(), a1a1(), d4()] {
        let l = build_lattice(&gram).unwrap();
        let d = discriminant_group(&l).unwrap();
        assert_eq!(d.order as usize, d.reps.len());
        for i in 0..d.dim() {
            // Q(-mu) = Q(mu) mod 1
            assert_eq!(d.q_vals[d.neg[i]], d.q_vals[i]);
            // level integrality
            let nq = Rat::from_integer(l.level) * d.q_vals[i];
            assert!(nq.is_integer(), "N Q(mu) not integral");
            for j in 0..d.dim() {
                let nb = Rat::from_integer(l.level) * d.b_vals[i][j];
                assert!(nb.is_integer(), "N b(mu,nu) not integral");
                // b(mu, nu) = Q(mu+nu) - Q(mu) - Q(nu) mod 1
                let sum: Vec<Rat> = (0..l.rank)
                    .map(|t| d.reps[i][t] + d.reps[j][t])
                    .collect();
                let q_sum = l.quad_rat(&sum);
                let expect = q_sum - d.q_vals[i] - d.q_vals[j];
                let diff = d.b_vals[i][j] - expect;
                assert!(diff.is_integer());
            }
            // Q(mu + lambda) = Q(mu) mod 1 for lattice vectors
            let mut shifted = d.reps[i].clone();
            shifted[0] += Rat::from_integer(1);
            let dq = l.quad_rat(&shifted) - l.quad_rat(&d.reps[i]);
            assert!(dq.is_integer());
        }
    }
}

#[test]
fn enumeration_examples() {
    let l = build_lattice(&a1()).unwrap();
    let vs =
        enumerate_coset_vectors(&l, &zero_coset(1), Target::Norm(Rat::from_integer(1)), ENUM_CAP)
            .unwrap();
    assert_eq!(vs.len(), 2);
    assert!(vs.contains(&vec![Rat::from_integer(1)]));
    assert!(vs.contains(&vec![Rat::from_integer(-1)]));

    let l = build_lattice(&a1a1()).unwrap();
    let vs =
        enumerate_coset_vectors(&l, &zero_coset(2), Target::Norm(Rat::from_integer(1)), ENUM_CAP)
            .unwrap();
    assert_eq!(vs.len(), 4);

    let vs =
        enumerate_coset_vectors(&l, &zero_coset(2), Target::Norm(Rat::from_integer(-1)), ENUM_CAP)
            .unwrap();
    assert!(vs.is_empty());
}

#[test]
fn enumeration_matches_box_scan() {
    for gram in [a1(), a1a1(), d4()] {
        let l = build_lattice(&gram).unwrap();
        let d = discriminant_group(&l).unwrap();
        for mu in 0..d.dim() {
            for m_num in 0..=6i64 {
                let m = Rat::from_integer(m_num) + d.q_vals[mu];
                let fp = enumerate_coset_vectors(&l, &d.reps[mu], Target::Norm(m), ENUM_CAP)
                    .unwrap()
                    .len();
                let bs = box_count(&gram, &d.reps[mu], m, 8);
                assert_eq!(fp, bs, "count mismatch gram={gram:?} mu={mu} m={m}");
            }
        }
    }
}

#[test]
fn enumeration_monotone_and_symmetric() {
    let l = build_lattice(&uu()).unwrap();
    let z = majorant(
        &l,
        &[vec![1.0, -1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, -1.0]],
    )
    .unwrap();
    let small = enumerate_coset_vectors(
        &l,
        &zero_coset(4),
        Target::MajorantBall { z: &z, bound: 4.0, norm: None },
        ENUM_CAP,
    )
    .unwrap();
    let large = enumerate_coset_vectors(
        &l,
        &zero_coset(4),
        Target::MajorantBall { z: &z, bound: 8.0, norm: None },
        ENUM_CAP,
    )
    .unwrap();
    assert!(small.len() < large.len());
    for v in &small {
        assert!(large.contains(v), "superset violated");
        let neg: Vec<Rat> = v.iter().map(|&x| -x).collect();
        assert!(small.contains(&neg), "symmetry violated");
    }
}

#[test]
fn enumeration_cap() {
    let l = build_lattice(&uu()).unwrap();
    let z = majorant(
        &l,
        &[vec![1.0, -1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, -1.0]],
    )
    .unwrap();
    let r = enumerate_coset_vectors(
        &l,
        &zero_coset(4),
        Target::MajorantBall { z: &z, bound: 1e9, norm: None },
        10_000,
    );
    assert!(matches!(r, Err(Error::BoundTooLarge { .. })));
}

#[test]
fn indefinite_needs_majorant() {
    let l = build_lattice(&uu()).unwrap();
    let r =
        enumerate_coset_vectors(&l, &zero_coset(4), Target::Norm(Rat::from_integer(1)), ENUM_CAP);
    assert!(matches!(r, Err(Error::IndefiniteWithoutMajorant)));
}

#[test]
fn majorant_examples() {
    // definite lattice: empty negative frame, Q_z = Q
    let l = build_lattice(&d4()).unwrap();
    let z = majorant(&l, &[]).unwrap();
    let x = [1.0, 0.0, 0.0, 0.0];
    assert!((z.q_z(&x) - l.quad_f64(&x)).abs() < 1e-12);
    assert!(z.r_zero(&l, &x).abs() < 1e-12);

    // 2U with z = span{e1 - f1, e2 - f2}
    let l = build_lattice(&uu()).unwrap();
    let z = majorant(
        &l,
        &[vec![1.0, -1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, -1.0]],
    )
    .unwrap();
    let x = [1.0, -1.0, 0.0, 0.0];
    assert!((l.quad_f64(&x) - (-1.0)).abs() < 1e-12);
    assert!((z.r_zero(&l, &x) - 2.0).abs() < 1e-12);
    assert!((z.q_z(&x) - 1.0).abs() < 1e-12);

    // x orthogonal to z has R0 = 0
    let x = [1.0, 1.0, 0.0, 0.0];
    assert!(z.r_zero(&l, &x).abs() < 1e-12);
}

#[test]
fn majorant_errors() {
    let l = build_lattice(&uu()).unwrap();
    assert!(matches!(
        majorant(&l, &[vec![1.0, -1.0, 0.0, 0.0]]),
        Err(Error::WrongDimension { .. })
    ));
    // positive-norm vector cannot span a negative plane
    assert!(matches!(
        majorant(&l, &[vec![1.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, -1.0]]),
        Err(Error::NotNegativeDefinite)
    ));
}

#[test]
fn r_zero_nonnegative_random() {
    let l = build_lattice(&uu()).unwrap();
    let z = majorant(
        &l,
        &[vec![1.0, -1.0, 0.2, 0.0], vec![0.1, 0.0, 1.0, -1.0]],
    )
    .unwrap();
    let mut state = 0x12345678u64;
    let mut rand = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state % 2001) as f64 / 100.0 - 10.0
    };
    for _ in 0..1000 {
        let x: Vec<f64> = (0..4).map(|_| rand()).collect();
        let r0 = z.r_zero(&l, &x);
        assert!(r0 >= -1e-9, "R0 negative: {r0}");
        let proj_norm: f64 = z.basis.iter().map(|u| l.bilin_f64(&x, u).abs()).sum();
        if proj_norm < 1e-12 {
            assert!(r0.abs() < 1e-20);
        }
    }
}
