mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use specavg::measure::{make_cantor, Atom, Measure};
use specavg::transform::{
    borel_transform, dyadic_bound_check, growth_lower_bound_check, poisson_transform, UpperHalfPlanePoint,
    DEFAULT_DYADIC_TERMS,
};

fn z(x: f64, eps: f64) -> UpperHalfPlanePoint {
    UpperHalfPlanePoint::new(x, eps).unwrap()
}

#[test]
fn uniform_matches_closed_form() {
    let m = Measure::uniform(-0.5, 2.0).unwrap();
    for (x, eps) in [(0.0, 1.0), (-0.5, 1e-6), (1.0, 1e-3), (5.0, 0.2), (2.0, 1e-9)] {
        let expect = common::uniform_borel(-0.5, 2.0, Complex64::new(x, eps));
        let got = borel_transform(&m, z(x, eps)).unwrap().to_complex();
        assert!((got - expect).norm() <= 1e-12 * expect.norm().max(1.0), "{x}+{eps}i: {got} vs {expect}");
    }
}

#[test]
fn cauchy_weight_and_lebesgue_poisson() {
    let c = Measure::cauchy_weight();
    for (x, y) in [(0.0, 1.0), (3.0, 1e-4), (-2.0, 10.0)] {
        let got = poisson_transform(&c, z(x, y)).unwrap();
        assert!((got - common::cauchy_poisson(x, y)).abs() < 1e-12);
    }
    let l = Measure::lebesgue();
    assert!((poisson_transform(&l, z(0.3, 1e-7)).unwrap() - std::f64::consts::PI).abs() < 1e-15);
    assert!(borel_transform(&l, z(0.0, 1.0)).is_err());
}

#[test]
fn dirac_transform_is_exact() {
    let m = Measure::dirac(0.25);
    let got = borel_transform(&m, z(1.0, 0.5)).unwrap().to_complex();
    let expect = 1.0 / (Complex64::new(0.25, 0.0) - Complex64::new(1.0, 0.5));
    assert!((got - expect).norm() < 1e-15);
}

#[test]
fn cantor_transform_matches_piecewise_sum() {
    let m = make_cantor(5).unwrap();
    let zz = Complex64::new(0.4, 0.01);
    let cells = 3f64.powi(5);
    let mut expect = Complex64::new(0.0, 0.0);
    for p in m.pieces() {
        expect += common::uniform_borel(p.start, p.end, zz) * (p.end - p.start) * cells / 32.0;
    }
    let got = borel_transform(&m, z(0.4, 0.01)).unwrap().to_complex();
    assert!((got - expect).norm() < 1e-11 * expect.norm());
}

fn arb_atomic() -> impl Strategy<Value = Measure> {
    prop::collection::vec((-3.0f64..3.0, 0.01f64..1.0), 1..8).prop_map(|raw| {
        let total: f64 = raw.iter().map(|r| r.1).sum();
        Measure::atomic(raw.into_iter().map(|(x, w)| Atom::new(x, w / total)).collect()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn herglotz_bounds(m in arb_atomic(), x in -4.0f64..4.0, le in -6.0f64..1.0) {
        let eps = 10f64.powf(le);
        let f = borel_transform(&m, z(x, eps)).unwrap();
        prop_assert!(f.p >= 0.0);
        prop_assert!(eps * f.p <= m.total_mass() * (1.0 + 1e-12));
        prop_assert!(eps * f.to_complex().norm() <= m.total_mass() * (1.0 + 1e-12));
    }

    #[test]
    fn growth_lower_bound_holds(m in arb_atomic(), x in -4.0f64..4.0, le in -5.0f64..0.5, alpha in 0.0f64..=1.0) {
        let c = growth_lower_bound_check(&m, x, 10f64.powf(le), alpha).unwrap();
        prop_assert!(c.holds, "{c:?}");
    }

    #[test]
    fn dyadic_bound_holds(m in arb_atomic(), x in -4.0f64..4.0, le in -5.0f64..0.5) {
        let c = dyadic_bound_check(&m, x, 10f64.powf(le), DEFAULT_DYADIC_TERMS).unwrap();
        prop_assert!(c.lhs <= c.rhs + 1e-12, "{c:?}");
    }

    #[test]
    fn uniform_closed_form_everywhere(a in -2.0f64..1.0, len in 1e-6f64..3.0, x in -4.0f64..4.0, le in -10.0f64..1.0, snap in 0usize..3) {
        let b = a + len;
        let x = [x, a, b][snap];
        let eps = 10f64.powf(le);
        let m = Measure::uniform(a, b).unwrap();
        let expect = common::uniform_borel(a, b, Complex64::new(x, eps));
        let got = borel_transform(&m, z(x, eps)).unwrap().to_complex();
        prop_assert!((got - expect).norm() <= 1e-9 * expect.norm().max(1.0), "{got} vs {expect}");
    }

    #[test]
    fn cantor_bounds_hold(x in -0.5f64..1.5, le in -5.0f64..0.0, alpha in 0.0f64..=1.0) {
        let m = make_cantor(9).unwrap();
        let eps = 10f64.powf(le);
        prop_assert!(growth_lower_bound_check(&m, x, eps, alpha).unwrap().holds);
        let d = dyadic_bound_check(&m, x, eps, DEFAULT_DYADIC_TERMS).unwrap();
        prop_assert!(d.lhs <= d.rhs + 1e-12);
    }
}
