use std::sync::Arc;

use rlt_core::lattice::{build_lattice, discriminant_group, majorant, EvenLattice, MajorantPoint};
use rlt_core::reglift::{
    bruinier_green, kudla_green_direct, kudla_green_via_lift, regularized_pairing, FmSource,
    PairingConfig,
};
use rlt_core::series::{DefiniteTheta, ModularFn, QExpansionFn, SiegelTheta, TruncatedPoincare};
use rlt_core::weilrep::{HalfInt, SchwartzVector, WeilRep};
use rlt_core::{maass::VProfile, qseries, C64, Rat};

fn setup(gram: &[Vec<i64>]) -> (Arc<EvenLattice>, Arc<WeilRep>) {
    let l = Arc::new(build_lattice(gram).unwrap());
    let d = discriminant_group(&l).unwrap();
    let rep = Arc::new(WeilRep::new(Arc::new(d), l.signature));
    (l, rep)
}

fn uu() -> (Arc<EvenLattice>, Arc<WeilRep>) {
    setup(&[
        vec![0, 1, 0, 0],
        vec![1, 0, 0, 0],
        vec![0, 0, 0, 1],
        vec![0, 0, 1, 0],
    ])
}

fn generic_z(l: &EvenLattice) -> MajorantPoint {
    majorant(
        l,
        &[
            vec![1.0, -1.0, 0.11, 0.07],
            vec![0.13, -0.05, 1.0, -1.0],
        ],
    )
    .unwrap()
}

/// Scaling wrapper for the bilinearity check.
struct Scaled<'a> {
    inner: &'a dyn ModularFn,
    c: C64,
}

impl ModularFn for Scaled<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn weight(&self) -> HalfInt {
        self.inner.weight()
    }
    fn is_dual(&self) -> bool {
        self.inner.is_dual()
    }
    fn eval(&self, tau: C64) -> rlt_core::Result<Vec<C64>> {
        Ok(self.inner.eval(tau)?.into_iter().map(|x| self.c * x).collect())
    }
    fn eval_peeled(&self, tau: C64) -> rlt_core::Result<Vec<C64>> {
        Ok(self.inner.eval_peeled(tau)?.into_iter().map(|x| self.c * x).collect())
    }
    fn peeled_is_zero(&self) -> bool {
        self.inner.peeled_is_zero()
    }
    fn declared_modes(&self) -> Vec<Rat> {
        self.inner.declared_modes()
    }
    fn known_mode_profile(&self, m: Rat) -> Option<Vec<VProfile>> {
        self.inner
            .known_mode_profile(m)
            .map(|ps| ps.into_iter().map(|p| p.scale(self.c)).collect())
    }
    fn trunc_bound(&self, tau: C64) -> f64 {
        self.c.norm() * self.inner.trunc_bound(tau)
    }
    fn breakpoints(&self, v: f64) -> Vec<f64> {
        self.inner.breakpoints(v)
    }
}

#[test]
fn unfolding_identity_definite_theta() {
    // <P_{m,v}, theta_Lambda> = mu(m)/v on A1+A1 and D4
    let cfg = PairingConfig::default();
    for gram in [
        vec![vec![2, 0], vec![0, 2]],
        vec![
            vec![2, -1, 0, 0],
            vec![-1, 2, -1, -1],
            vec![0, -1, 2, 0],
            vec![0, -1, 0, 2],
        ],
    ] {
        let (l, rep) = setup(&gram);
        let k = HalfInt::int(-(l.rank as i32) / 2);
        let th = DefiniteTheta::new(l.clone(), rep.clone(), Rat::from_integer(9)).unwrap();
        for m in [0i64, 1, 2] {
            for w in [0.7, 1.0, 2.0] {
                let p = TruncatedPoincare::new(
                    rep.clone(),
                    k,
                    Rat::from_integer(m),
                    0,
                    w,
                )
                .unwrap();
                let res = regularized_pairing(&p, &th, &cfg).unwrap();
                let expect = th.coefficient(Rat::from_integer(m))[0] / w;
                assert!(
                    (res.value.re - expect).abs() < 1e-3 * expect.max(1.0),
                    "gram rank {} m={m} w={w}: {} vs {expect}",
                    l.rank,
                    res.value.re
                );
                assert!(res.value.im.abs() < 1e-6);
                assert!(res.logt_coefficient.norm() < 1e-10);
            }
        }
    }
}

#[test]
fn pairing_is_bilinear() {
    let (l, rep) = setup(&[vec![2, 0], vec![0, 2]]);
    let th = DefiniteTheta::new(l, rep.clone(), Rat::from_integer(6)).unwrap();
    let cfg = PairingConfig::default();

    // fully declared input: the pairing is exactly linear in both slots
    let mut fexp = rlt_core::maass::FourierExpansion::new(
        HalfInt::int(-1),
        false,
        4,
        rlt_core::maass::Growth::Exponential,
    );
    fexp.set_component(Rat::from_integer(-1), 0, VProfile::constant(C64::new(1.0, 0.0)));
    fexp.set_component(Rat::from_integer(0), 0, VProfile::constant(C64::new(0.3, -0.2)));
    let f = QExpansionFn::new(fexp);
    let base = regularized_pairing(&f, &th, &cfg).unwrap().value;
    let a = C64::new(0.7, -1.3);
    let b = C64::new(-0.4, 0.9);
    let left = regularized_pairing(&Scaled { inner: &f, c: a }, &th, &cfg).unwrap().value;
    assert!((left - a * base).norm() < 1e-10 * base.norm().max(1.0));
    let right = regularized_pairing(&f, &Scaled { inner: &th, c: b }, &cfg).unwrap().value;
    assert!((right - b * base).norm() < 1e-10 * base.norm().max(1.0));

    // numeric path: linear within the quadrature tolerance
    let p = TruncatedPoincare::new(rep, HalfInt::int(-1), Rat::from_integer(1), 0, 0.8).unwrap();
    let pb = regularized_pairing(&p, &th, &cfg).unwrap().value;
    let pl = regularized_pairing(&Scaled { inner: &p, c: a }, &th, &cfg).unwrap().value;
    assert!((pl - a * pb).norm() < 2e-3 * pb.norm().max(1.0));
}

#[test]
fn zero_handle_pairs_to_zero() {
    struct ZeroFn;
    impl ModularFn for ZeroFn {
        fn dim(&self) -> usize {
            4
        }
        fn weight(&self) -> HalfInt {
            HalfInt::int(-1)
        }
        fn is_dual(&self) -> bool {
            false
        }
        fn eval(&self, _tau: C64) -> rlt_core::Result<Vec<C64>> {
            Ok(vec![C64::new(0.0, 0.0); 4])
        }
    }
    let (l, rep) = setup(&[vec![2, 0], vec![0, 2]]);
    let th = DefiniteTheta::new(l, rep, Rat::from_integer(4)).unwrap();
    let res = regularized_pairing(&ZeroFn, &th, &PairingConfig::default()).unwrap();
    assert_eq!(res.value, C64::new(0.0, 0.0));
    // only the theta truncation certificate contributes to the budget
    assert!(res.quadrature_error < 1e-6);
}

#[test]
fn weight_mismatch_rejected() {
    let (l, rep) = setup(&[vec![2, 0], vec![0, 2]]);
    let th = DefiniteTheta::new(l, rep.clone(), Rat::from_integer(4)).unwrap();
    let p = TruncatedPoincare::new(rep, HalfInt::int(-2), Rat::from_integer(1), 0, 1.0).unwrap();
    assert!(regularized_pairing(&p, &th, &PairingConfig::default()).is_err());
}

/// Raw 2D quadrature of int_{F_T} f g dmu, the left side of the unfolding
/// consistency check (independent of the engine's mode bookkeeping).
fn raw_ft_integral(
    f: &dyn ModularFn,
    g: &dyn ModularFn,
    t_max: f64,
    nu: usize,
    nv: usize,
) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    // sliver below v = 1 (u, t)-parametrized
    for i in 0..nu {
        let u = -0.5 + (i as f64 + 0.5) / nu as f64;
        let vmin = (1.0 - u * u).sqrt();
        let nt = 24;
        for j in 0..nt {
            let t = (j as f64 + 0.5) / nt as f64;
            let v = (1.0 - t) * vmin + t;
            let tau = C64::new(u, v);
            let fv = f.eval(tau).unwrap();
            let gv = g.eval(tau).unwrap();
            let dot: C64 = fv.iter().zip(&gv).map(|(&a, &b)| a * b).sum();
            acc += dot * (1.0 - vmin) / (nt as f64) / (v * v) / nu as f64;
        }
    }
    // strip 1 <= v <= T
    for j in 0..nv {
        let v = 1.0 + (j as f64 + 0.5) * (t_max - 1.0) / nv as f64;
        for i in 0..nu {
            let u = -0.5 + (i as f64 + 0.5) / nu as f64;
            let tau = C64::new(u, v);
            let fv = f.eval(tau).unwrap();
            let gv = g.eval(tau).unwrap();
            let dot: C64 = fv.iter().zip(&gv).map(|(&a, &b)| a * b).sum();
            acc += dot * (t_max - 1.0) / (nv as f64 * nu as f64) / (v * v);
        }
    }
    acc
}

#[test]
fn unfolding_consistency_rectangle() {
    // int_{F_T} P_{m,w,mu} g dmu = int_{R_w^T} e^{-2 pi i m tau} g(phi_mu) dmu
    let (l, rep) = setup(&[vec![2, 0], vec![0, 2]]);
    let th = DefiniteTheta::new(l, rep.clone(), Rat::from_integer(8)).unwrap();
    let m = Rat::from_integer(1);
    let w = 1.3;
    let t_max = 3.0;
    let p = TruncatedPoincare::new(rep, HalfInt::int(-1), m, 0, w).unwrap();
    let lhs = raw_ft_integral(&p, &th, t_max, 180, 160);
    // rectangle: u-average of e^{-2 pi i m tau} g(phi_0) is the m-th
    // coefficient of g, so the integral is mu(m) (1/w - 1/T)
    let mut rhs = C64::new(0.0, 0.0);
    let nv = 400;
    for j in 0..nv {
        let v = w + (j as f64 + 0.5) * (t_max - w) / nv as f64;
        let nu = 64;
        for i in 0..nu {
            let u = -0.5 + (i as f64 + 0.5) / nu as f64;
            let tau = C64::new(u, v);
            let q_m = (C64::new(0.0, -2.0 * std::f64::consts::PI) * tau).exp();
            let gv = th.eval(tau).unwrap();
            rhs += q_m * gv[0] * (t_max - w) / (nv as f64 * nu as f64) / (v * v);
        }
    }
    assert!(
        (lhs - rhs).norm() < 2e-4 * rhs.norm(),
        "unfolding mismatch: {lhs} vs {rhs}"
    );
}

#[test]
fn t_stability() {
    let (l, rep) = setup(&[vec![2, 0], vec![0, 2]]);
    let th = DefiniteTheta::new(l, rep.clone(), Rat::from_integer(8)).unwrap();
    let p = TruncatedPoincare::new(rep, HalfInt::int(-1), Rat::from_integer(1), 0, 0.7).unwrap();
    let cfg = PairingConfig::default();
    let r1 = regularized_pairing(&p, &th, &cfg).unwrap();
    let mut cfg2 = cfg.clone();
    cfg2.v_stop_min *= 2.0;
    cfg2.v_stop_max *= 2.0;
    let r2 = regularized_pairing(&p, &th, &cfg2).unwrap();
    let allowed = 3.0 * r1.quadrature_error.max(r2.quadrature_error);
    assert!(
        (r1.value - r2.value).norm() <= allowed.max(1e-12),
        "T-instability: {:e} vs allowed {allowed:e}",
        (r1.value - r2.value).norm()
    );
}

#[test]
fn kudla_direct_basics() {
    let (l, rep) = uu();
    let z = generic_z(&l);
    let phi0 = SchwartzVector::basis(1, 0, false);
    // m = 0 excludes x = 0 and stays finite for generic z
    let v0 = kudla_green_direct(&l, &rep.disc, Rat::from_integer(0), 1.0, &phi0, &z, 30.0)
        .unwrap();
    assert!(v0.re.is_finite() && v0.im.abs() < 1e-12);
    // m < 0: no walls (R0 = 0 forces Q >= 0), smooth values at nearby z
    let v_neg = kudla_green_direct(&l, &rep.disc, Rat::from_integer(-1), 1.0, &phi0, &z, 30.0)
        .unwrap();
    assert!(v_neg.re > 0.0);
    let z2 = majorant(
        &l,
        &[
            vec![1.0, -1.0, 0.112, 0.07],
            vec![0.13, -0.05, 1.0, -1.0],
        ],
    )
    .unwrap();
    let v_neg2 =
        kudla_green_direct(&l, &rep.disc, Rat::from_integer(-1), 1.0, &phi0, &z2, 30.0).unwrap();
    assert!((v_neg - v_neg2).norm() < 0.05 * v_neg.norm());
    // on the wall: error
    let zwall = majorant(
        &l,
        &[vec![1.0, -1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, -1.0]],
    )
    .unwrap();
    assert!(kudla_green_direct(&l, &rep.disc, Rat::from_integer(1), 1.0, &phi0, &zwall, 30.0)
        .is_err());
}

#[test]
fn kudla_two_routes_agree() {
    let (l, rep) = uu();
    let z = generic_z(&l);
    let phi0 = SchwartzVector::basis(1, 0, false);
    let direct =
        kudla_green_direct(&l, &rep.disc, Rat::from_integer(1), 1.0, &phi0, &z, 34.0).unwrap();
    let theta = SiegelTheta::new(l.clone(), rep.clone(), generic_z(&l), 14.0).unwrap();
    let cfg = PairingConfig::default();
    let lift =
        kudla_green_via_lift(&rep, &theta, Rat::from_integer(1), 0, 1.0, &cfg).unwrap();
    assert!(
        (lift.value - direct).norm() < 1e-3 * direct.norm().max(1.0),
        "two-route mismatch: {} vs {direct}",
        lift.value
    );
    // generic z: no log T coefficient for m = 1
    assert!(lift.logt_coefficient.norm() < 1e-10);
}

#[test]
fn kudla_wall_logt_count() {
    let (l, rep) = uu();
    // z* orthogonal to x = +-(e1 + f1) with Q = 1 and to nothing else of that
    // norm (the second frame vector is tilted off e2 + f2)
    let zwall = majorant(
        &l,
        &[vec![1.0, -1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, -1.1]],
    )
    .unwrap();
    let theta = SiegelTheta::new(l.clone(), rep.clone(), zwall, 14.0).unwrap();
    assert_eq!(theta.wall_count(Rat::from_integer(1))[0], 2);
    let cfg = PairingConfig::default();
    let lift =
        kudla_green_via_lift(&rep, &theta, Rat::from_integer(1), 0, 1.0, &cfg).unwrap();
    assert!(
        (lift.logt_coefficient - C64::new(2.0, 0.0)).norm() < 1e-10,
        "log T coefficient {}",
        lift.logt_coefficient
    );
}

#[test]
fn kudla_m0_log_correction_and_f0_lift() {
    let (l, rep) = uu();
    let theta = SiegelTheta::new(l.clone(), rep.clone(), generic_z(&l), 14.0).unwrap();
    let cfg = PairingConfig::default();
    // m = 0 lift carries the log T coefficient S_0 = 1 (the zero vector)
    let lift = kudla_green_via_lift(&rep, &theta, Rat::from_integer(0), 0, 2.0, &cfg).unwrap();
    assert!((lift.logt_coefficient - C64::new(1.0, 0.0)).norm() < 1e-10);
    // two-route check including the + log w correction
    let phi0 = SchwartzVector::basis(1, 0, false);
    let direct =
        kudla_green_direct(&l, &rep.disc, Rat::from_integer(0), 2.0, &phi0, &generic_z(&l), 34.0)
            .unwrap();
    assert!(
        (lift.value - direct).norm() < 1e-3 * direct.norm().max(1.0),
        "m=0 routes: {} vs {direct}",
        lift.value
    );
}

#[test]
fn bruinier_green_via_faber() {
    let (l, rep) = uu();
    let theta = SiegelTheta::new(l.clone(), rep.clone(), generic_z(&l), 16.0).unwrap();
    let cfg = PairingConfig::default();
    // F_1 = J_1 = j - 744 on the trivial discriminant form (weight 0)
    let j1 = qseries::qseries_to_expansion(&qseries::faber(1, 40), HalfInt::ZERO, false);
    let res = bruinier_green(&rep, &theta, Rat::from_integer(1), 0, FmSource::Supplied(&j1), &cfg)
        .unwrap();
    assert!(res.value.re.is_finite());
    assert!(res.value.im.abs() < 1e-6 * res.value.re.abs().max(1.0));
    // generic z, c_{F_1}(0) = 0: no log T
    assert!(res.logt_coefficient.norm() < 1e-9);
    // m <= 0 with the Hejhal source is identically zero... but 2U has k = 0,
    // so the Hejhal route must refuse
    assert!(matches!(
        bruinier_green(&rep, &theta, Rat::from_integer(1), 0, FmSource::Hejhal { cmax: 10 }, &cfg),
        Err(rlt_core::Error::NonNegativeWeight)
    ));
}

#[test]
fn bruinier_pairing_definite_d4_closed_form() {
    // <F_m, theta_D4> = 4 pi eta(m), eta(m) = m mu(m)/2 (5% tolerance)
    let (l, rep) = setup(&[
        vec![2, -1, 0, 0],
        vec![-1, 2, -1, -1],
        vec![0, -1, 2, 0],
        vec![0, -1, 0, 2],
    ]);
    let th = DefiniteTheta::new(l, rep.clone(), Rat::from_integer(8)).unwrap();
    let mut fm = rlt_core::series::HejhalPoincare::new(
        rep.clone(),
        HalfInt::int(-2),
        Rat::from_integer(1),
        0,
        40,
    )
    .unwrap();
    fm.estimate_c0().unwrap();
    let cfg = PairingConfig::default();
    let res = regularized_pairing(&fm, &th, &cfg).unwrap();
    let mu1 = th.coefficient(Rat::from_integer(1))[0];
    let target = 4.0 * std::f64::consts::PI * mu1 / 2.0; // 48 pi
    assert!(
        (res.value.re - target).abs() < 0.05 * target,
        "pairing {} vs 4 pi eta = {target}",
        res.value.re
    );
    assert!(res.value.im.abs() < 0.01 * target);
}

#[test]
fn undeclared_tail_detected() {
    // a handle that grows like q^{-1} but declares nothing
    struct Liar;
    impl ModularFn for Liar {
        fn dim(&self) -> usize {
            4
        }
        fn weight(&self) -> HalfInt {
            HalfInt::int(-1)
        }
        fn is_dual(&self) -> bool {
            false
        }
        fn eval(&self, tau: C64) -> rlt_core::Result<Vec<C64>> {
            let mut out = vec![C64::new(0.0, 0.0); 4];
            out[0] = (C64::new(0.0, -2.0 * std::f64::consts::PI) * tau).exp();
            Ok(out)
        }
    }
    let (l, rep) = setup(&[vec![2, 0], vec![0, 2]]);
    let th = DefiniteTheta::new(l, rep, Rat::from_integer(6)).unwrap();
    let r = regularized_pairing(&Liar, &th, &PairingConfig::default());
    assert!(matches!(r, Err(rlt_core::Error::UndeclaredTail { .. })));
}

#[test]
fn supplied_expansion_pairing_matches_handle_route() {
    // pairing <P, theta-expansion-as-QExpansionFn> equals <P, DefiniteTheta>
    let (l, rep) = setup(&[vec![2, 0], vec![0, 2]]);
    let th = DefiniteTheta::new(l, rep.clone(), Rat::from_integer(8)).unwrap();
    let qe = QExpansionFn::new(th.expansion());
    let p = TruncatedPoincare::new(rep, HalfInt::int(-1), Rat::from_integer(2), 0, 1.0).unwrap();
    let cfg = PairingConfig::default();
    let a = regularized_pairing(&p, &th, &cfg).unwrap().value;
    let b = regularized_pairing(&p, &qe, &cfg).unwrap().value;
    assert!((a - b).norm() < 1e-8 * a.norm().max(1.0));
}
