mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use specavg::operator::{eigendecompose, CyclicVector, RankOneFamily, SelfAdjointOperator};

use common::{dense, jacobi, moments, perturbed_entries, resolvent, sturm_eigenvalues};

#[test]
fn eigenvalues_match_sturm_bisection() {
    for seed in [1, 2, 3] {
        let fam = dense(8, seed);
        let op = fam.operator();
        let expect = sturm_eigenvalues(op.dim(), op.entries());
        let got = &eigendecompose(op).unwrap().values;
        for (a, b) in got.iter().zip(&expect) {
            assert!((a - b).abs() <= 1e-10 * fam.norm(), "{a} vs {b}");
        }
    }
}

#[test]
fn secular_roots_match_sturm_bisection() {
    let fam = dense(8, 11);
    let op = fam.operator();
    for lambda in [-1e3, -2.5, -1e-6, 1e-6, 0.3, 7.0, 1e3] {
        let m = fam.perturbed_measure_secular(lambda).unwrap();
        let expect = sturm_eigenvalues(op.dim(), &perturbed_entries(op, fam.phi(), lambda));
        let scale = fam.norm().max(lambda.abs());
        for atom in m.atoms() {
            let nearest = expect
                .iter()
                .map(|e| (e - atom.position).abs())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest <= 1e-10 * scale, "λ = {lambda}: {} off by {nearest}", atom.position);
        }
    }
}

#[test]
fn perturbed_weights_reproduce_moments() {
    let fam = jacobi(10, 4);
    let op = fam.operator();
    for lambda in [-3.0, -0.2, 0.5, 4.0] {
        let m = fam.perturbed_measure_secular(lambda).unwrap();
        let entries = perturbed_entries(op, fam.phi(), lambda);
        let expect = moments(op.dim(), &entries, fam.phi().as_slice(), 6);
        let scale = fam.norm() + lambda.abs();
        for (k, e) in expect.iter().enumerate() {
            let got: f64 = m.atoms().iter().map(|a| a.weight * a.position.powi(k as i32)).sum();
            assert!((got - e).abs() <= 1e-9 * scale.powi(k as i32), "λ = {lambda}, k = {k}: {got} vs {e}");
        }
    }
}

#[test]
fn aronszajn_krein_matches_resolvent() {
    let fam = dense(6, 9);
    let op = fam.operator();
    for lambda in [-2.0, 0.7] {
        let entries = perturbed_entries(op, fam.phi(), lambda);
        let m = fam.perturbed_measure_secular(lambda).unwrap();
        for z in [Complex64::new(0.1, 0.01), Complex64::new(-3.0, 1.0), Complex64::new(2.0, 1e-4)] {
            let expect = resolvent(op.dim(), &entries, fam.phi().as_slice(), z);
            let got = m.borel(z);
            assert!((got - expect).norm() <= 1e-9 * expect.norm(), "{got} vs {expect}");
            let ak = specavg::operator::aronszajn_krein(fam.borel_base(z), lambda).unwrap();
            assert!((ak - expect).norm() <= 1e-9 * expect.norm());
        }
    }
}

#[test]
fn non_cyclic_vector_sees_one_eigenvalue() {
    let op = SelfAdjointOperator::diagonal(&[-1.0, 0.5, 2.0]);
    let fam = RankOneFamily::new(op, CyclicVector::basis(3, 1).unwrap()).unwrap();
    assert!(!fam.is_cyclic());
    let m = fam.perturbed_measure_secular(0.25).unwrap();
    assert_eq!(m.atoms().len(), 1);
    assert!((m.atoms()[0].position - 0.75).abs() < 1e-15);
}

#[test]
fn asymmetric_input_is_rejected() {
    assert!(SelfAdjointOperator::new(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
    assert!(CyclicVector::new(vec![1.0, 1.0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn perturbed_measures_are_probability_measures(seed in 0u64..1000, lambda in -20.0f64..20.0) {
        prop_assume!(lambda != 0.0);
        let fam = dense(7, seed);
        let m = fam.perturbed_measure_secular(lambda).unwrap();
        prop_assert!((m.total_mass() - 1.0).abs() <= 1e-12);
        prop_assert!(m.atoms().iter().all(|a| a.weight >= 0.0));
    }

    #[test]
    fn positive_coupling_interlaces(seed in 0u64..1000, lambda in 0.01f64..20.0) {
        let fam = jacobi(6, seed);
        let base: Vec<f64> = fam.poles().iter().map(|a| a.position).collect();
        let pert: Vec<f64> = fam.perturbed_measure_secular(lambda).unwrap().atoms().iter().map(|a| a.position).collect();
        prop_assert_eq!(base.len(), pert.len());
        for j in 0..base.len() {
            prop_assert!(pert[j] > base[j]);
            if j + 1 < base.len() {
                prop_assert!(pert[j] < base[j + 1]);
            }
        }
    }

    #[test]
    fn distinct_couplings_are_mutually_singular(seed in 0u64..1000, l1 in -5.0f64..5.0, l2 in -5.0f64..5.0) {
        prop_assume!((l1 - l2).abs() > 1e-3);
        let fam = jacobi(6, seed);
        prop_assert!(fam.mutual_singularity_check(l1, l2, 1e-9).unwrap());
    }

    #[test]
    fn direct_and_secular_routes_agree(seed in 0u64..1000, lambda in -10.0f64..10.0) {
        prop_assume!(lambda.abs() > 1e-9);
        let fam = dense(6, seed);
        let d = fam.perturbed_measure_direct(lambda).unwrap();
        let s = fam.perturbed_measure_secular(lambda).unwrap();
        for a in s.atoms().iter().filter(|a| a.weight > 1e-8) {
            let b = d.atoms().iter().min_by(|p, q| (p.position - a.position).abs().total_cmp(&(q.position - a.position).abs())).unwrap();
            prop_assert!((a.position - b.position).abs() <= 1e-10 * fam.norm().max(lambda.abs()));
            prop_assert!((a.weight - b.weight).abs() <= 1e-8);
        }
    }
}
