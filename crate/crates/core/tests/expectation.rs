use glevy_core::expectation::{
    capacity, check_nested, refine_and_compare, sublinear_expectation, Dynamics, Simulation,
};
use glevy_core::paths::{CoefficientSet, PathRecord, TimeGrid};
use glevy_core::scenario::{enumerate_scenarios, ControlPair, ScenarioFamily};
use glevy_core::uncertainty::{JumpMeasure, UncertaintySet};
use glevy_core::Error;
use std::sync::Arc;

fn vols(q: &[f64]) -> UncertaintySet {
    UncertaintySet::scalar(vec![JumpMeasure::zero(1)], q).unwrap()
}

fn b1(r: &PathRecord) -> f64 {
    r.driver.b_at(r.steps())[0]
}

fn sim(set: &UncertaintySet, paths: usize) -> Simulation<'_> {
    Simulation::new(set, Dynamics::pure(1), TimeGrid::new(1.0, 1.0 / 32.0).unwrap(), paths, 2024)
}

#[test]
fn constant_payoff_has_zero_error() {
    let set = vols(&[0.5, 1.0]);
    let fam = enumerate_scenarios(&ScenarioFamily::product_lattice(2, 16), &set, 1.0).unwrap();
    let est = sublinear_expectation(|_| 0.7, &fam, &sim(&set, 333)).unwrap();
    assert_eq!(est.value, 0.7);
    assert!(est.per_scenario.iter().all(|s| s.std_error == 0.0 && s.mean == 0.7));
    assert_eq!(est.argmax_scenario, 0);
}

#[test]
fn brownian_terminal_is_centred() {
    let set = vols(&[0.5, 1.0]);
    let fam = enumerate_scenarios(&ScenarioFamily::product_lattice(1, 4), &set, 1.0).unwrap();
    let est = sublinear_expectation(b1, &fam, &sim(&set, 4000)).unwrap();
    for s in &est.per_scenario {
        assert!(s.mean.abs() <= 3.0 * s.std_error, "{s:?}");
    }
}

#[test]
fn squared_brownian_is_maximised_at_full_volatility() {
    let set = vols(&[0.5, 1.0]);
    let fam = enumerate_scenarios(&ScenarioFamily::product_lattice(4, 16), &set, 1.0).unwrap();
    let est = sublinear_expectation(|r| b1(r).powi(2), &fam, &sim(&set, 4000)).unwrap();
    assert_eq!(fam.scenarios.len(), 16);
    // Under common noise the q ≡ 1 scenario dominates the sample mean path by path.
    assert!((est.value - 1.0).abs() <= 0.02 + 3.0 * est.argmax_stat().std_error, "{}", est.value);
    assert_eq!(fam.scenarios[est.argmax_scenario].scenario_at(0, &[0.0]), ControlPair::new(0, 1));
}

#[test]
fn capacity_examples() {
    let set = vols(&[0.5, 1.0]);
    let fam = enumerate_scenarios(&ScenarioFamily::product_lattice(2, 16), &set, 1.0).unwrap();
    let s = sim(&set, 4000);
    assert_eq!(capacity(|_| true, &fam, &s).unwrap().value, 1.0);
    assert_eq!(capacity(|_| false, &fam, &s).unwrap().value, 0.0);
    let est = capacity(|r| b1(r) > 0.0, &fam, &s).unwrap();
    for st in &est.per_scenario {
        assert!((st.mean - 0.5).abs() <= 3.0 * st.std_error);
    }
}

#[test]
fn non_finite_payoff_names_the_path() {
    let set = vols(&[1.0]);
    let fam = enumerate_scenarios(&ScenarioFamily::single(), &set, 1.0).unwrap();
    let err = sublinear_expectation(|r| if b1(r) > 1.5 { f64::NAN } else { 0.0 }, &fam, &sim(&set, 2000)).unwrap_err();
    match err {
        Error::NonFinitePayoff { seed } => {
            assert_eq!(seed.master, 2024);
            assert_eq!(seed.scenario, 0);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn needs_two_paths() {
    let set = vols(&[1.0]);
    let fam = enumerate_scenarios(&ScenarioFamily::single(), &set, 1.0).unwrap();
    assert!(sublinear_expectation(|_| 0.0, &fam, &sim(&set, 1)).is_err());
}

#[test]
fn result_does_not_depend_on_thread_count() {
    let set = vols(&[0.5, 1.0]);
    let fam = enumerate_scenarios(&ScenarioFamily::product_lattice(2, 16), &set, 1.0).unwrap();
    let s = sim(&set, 500);
    let payoff = |r: &PathRecord| (b1(r) * 3.0).sin();
    let a = sublinear_expectation(payoff, &fam, &s).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| sublinear_expectation(payoff, &fam, &s).unwrap());
    assert_eq!(a, b);
}

#[test]
fn refinement_single_into_lattice() {
    let set = vols(&[0.5, 1.0]);
    let single = enumerate_scenarios(&ScenarioFamily::single(), &set, 1.0).unwrap();
    let lattice = enumerate_scenarios(&ScenarioFamily::product_lattice(2, 16), &set, 1.0).unwrap();
    let s = sim(&set, 2000);
    let r = refine_and_compare(|r| b1(r).powi(2), (&single, &s), (&lattice, &s)).unwrap();
    assert!(r.monotone);
    assert!(r.fine.value >= r.coarse.value);

    let c = refine_and_compare(|_| 1.5, (&single, &s), (&lattice, &s)).unwrap();
    assert_eq!(c.fine.value, c.coarse.value);
}

#[test]
fn refinement_of_volatility_grid_improves_concave_payoff() {
    let coarse_set = vols(&[1.0]);
    let fine_set = vols(&[0.5, 1.0]);
    let coarse = enumerate_scenarios(&ScenarioFamily::single(), &coarse_set, 1.0).unwrap();
    let fine = enumerate_scenarios(&ScenarioFamily::product_lattice(1, 4), &fine_set, 1.0).unwrap();
    let r = refine_and_compare(
        |r| -b1(r).powi(2),
        (&coarse, &sim(&coarse_set, 4000)),
        (&fine, &sim(&fine_set, 4000)),
    )
    .unwrap();
    assert!(r.monotone);
    assert!((r.coarse.value + 1.0).abs() < 0.1);
    assert!((r.fine.value + 0.25).abs() < 0.03, "{}", r.fine.value);
}

#[test]
fn non_nested_families_are_rejected() {
    let a = vols(&[1.0]);
    let b = vols(&[0.5]);
    let fa = enumerate_scenarios(&ScenarioFamily::single(), &a, 1.0).unwrap();
    let fb = enumerate_scenarios(&ScenarioFamily::single(), &b, 1.0).unwrap();
    assert!(matches!(check_nested(&fa, &a, &fb, &b), Err(Error::NotNested(_))));
    let lattice = enumerate_scenarios(&ScenarioFamily::product_lattice(2, 16), &b, 1.0).unwrap();
    assert!(check_nested(&fb, &b, &lattice, &b).is_ok());
    assert!(check_nested(&lattice, &b, &fb, &b).is_ok());
    let twin = vols(&[0.5, 1.0]);
    let big = enumerate_scenarios(&ScenarioFamily::product_lattice(2, 16), &twin, 1.0).unwrap();
    assert!(check_nested(&big, &twin, &fb, &b).is_err());
}

#[test]
fn sde_dynamics_are_used() {
    let set = vols(&[1.0]);
    let fam = enumerate_scenarios(&ScenarioFamily::single(), &set, 1.0).unwrap();
    let drift = CoefficientSet::zero(1).with_drift(Arc::new(|_, _, o: &mut [f64]| o[0] = 2.0));
    let s = Simulation::new(
        &set,
        Dynamics::Sde {
            coefficients: drift,
            y0: vec![1.0],
        },
        TimeGrid::new(1.0, 0.125).unwrap(),
        10,
        1,
    );
    let est = sublinear_expectation(|r| r.y_terminal()[0], &fam, &s).unwrap();
    assert_eq!(est.value, 3.0);
}
