mod common;

use proptest::prelude::*;
use specavg::averaging::{make_nu, KappaProbe, NuKind, QuadratureConfig};
use specavg::continuity::{
    ac_density_estimate, beta_for_delta, beta_threshold, classify_point, gamma_exponent, main_theorem_report,
    rogers_taylor_split, scaling_exponent_growth, scaling_exponent_poisson, Classification, MainTheoremConfig,
    PointClass, TrendConfig,
};
use specavg::ladder::Ladder;
use specavg::measure::{make_cantor, Atom, IntervalScan, Measure};

fn ladder() -> Ladder {
    Ladder::new(1.0, 0.5, 30)
}

#[test]
fn gamma_at_one_half() {
    assert_eq!(gamma_exponent(0.5, 0.75).unwrap().gamma, 0.25);
}

#[test]
fn cantor_exponent_both_routes() {
    let alpha = 2f64.ln() / 3f64.ln();
    let m = make_cantor(12).unwrap();
    let t = TrendConfig::default();
    let g = scaling_exponent_growth(&m, 0.0, alpha, &ladder(), &t).unwrap();
    let p = scaling_exponent_poisson(&m, 0.0, alpha, &ladder(), &t).unwrap();
    assert!((g.exponent - alpha).abs() < 0.05, "{g:?}");
    assert!((p.exponent - alpha).abs() < 0.07, "{p:?}");
    assert_eq!(g.classification, Classification::FinitePositive);
}

#[test]
fn atom_is_infinite_above_zero() {
    let m = Measure::dirac(0.2);
    let (class, est) = classify_point(&m, 0.2, 0.5, &ladder(), &TrendConfig::default()).unwrap();
    assert_eq!(class, PointClass::TInfinite);
    assert!(est.exponent.abs() < 1e-12);
}

#[test]
fn gap_point_vanishes() {
    let m = make_cantor(10).unwrap();
    let est = scaling_exponent_growth(&m, 0.5, 0.6, &ladder(), &TrendConfig::default()).unwrap();
    assert_eq!(est.exponent, f64::INFINITY);
    assert_eq!(est.classification, Classification::Zero);
}

#[test]
fn density_of_uniform() {
    let m = Measure::uniform(0.0, 2.0).unwrap();
    let d = ac_density_estimate(&m, 1.0, &Ladder::new(0.1, 0.5, 12), &TrendConfig::default()).unwrap();
    assert!((d.density - 0.5).abs() < 1e-6, "{d:?}");
    assert!(!d.divergent);
}

#[test]
fn rogers_taylor_removes_the_atom() {
    let m = Measure::uniform(0.0, 1.0)
        .unwrap()
        .scaled(0.7)
        .unwrap()
        .combine(&Measure::atomic(vec![Atom::new(0.5, 0.3)]).unwrap())
        .unwrap();
    let scan = IntervalScan::new(0.0).lattice(0.0, 1.0 / 243.0, 243, 243);
    let split = rogers_taylor_split(&m, 1.0, 1.0, &scan).unwrap();
    assert!(split.certified);
    assert!((split.eta2_mass - 0.3).abs() < 1e-12);
    assert_eq!(split.moved_atoms.len(), 1);
}

#[test]
fn lebesgue_nu_report_is_clean() {
    let fam = common::jacobi(5, 3);
    let p = KappaProbe::new(fam.clone(), make_nu(&NuKind::Lebesgue).unwrap(), QuadratureConfig::default()).unwrap();
    let cfg = MainTheoremConfig {
        alpha: 1.0,
        delta_targets: vec![0.4],
        outside_tolerance: 0.1,
        ladder: ladder(),
        trend: TrendConfig::default(),
    };
    let pts: Vec<f64> = fam.poles().iter().map(|a| a.position).collect();
    let r = main_theorem_report(&p, &pts, &cfg).unwrap();
    assert_eq!(r.violations, 0);
    assert_eq!(r.indeterminate, 0);
    assert!(r.points.iter().all(|d| (d.growth.exponent - 1.0).abs() < 1e-6));
}

proptest! {
    #[test]
    fn beta_for_delta_round_trips(alpha in 0.01f64..0.99, t in 0.0f64..1.0) {
        let lo = (3.0 * alpha - 2.0).max(0.0);
        let delta = lo + (alpha - lo) * (0.001 + 0.998 * t);
        let b = beta_for_delta(alpha, delta).unwrap();
        prop_assert!(b.beta > 0.0 && b.beta < 1.0);
        let g = gamma_exponent(alpha, b.beta).unwrap().gamma;
        prop_assert!((g - delta).abs() <= 1e-14);
    }

    #[test]
    fn threshold_is_where_gamma_turns_positive(alpha in 0.01f64..0.99) {
        let th = beta_threshold(alpha);
        prop_assert!((th - ((2.0 - 3.0 * alpha) / (2.0 * (1.0 - alpha))).max(0.0)).abs() < 1e-15);
        if th > 1e-6 && th < 1.0 - 1e-6 {
            prop_assert!(gamma_exponent(alpha, th + 1e-6).unwrap().gamma > 0.0);
            prop_assert!(gamma_exponent(alpha, th - 1e-6).unwrap().gamma < 0.0);
        }
    }
}
