use glevy_core::paths::{
    random_measure_sum, simulate_driver, simulate_sde, validate_coefficients, write_events_csv, write_path_csv,
    CoefficientSet, ProbeBox, TimeGrid,
};
use glevy_core::presets;
use glevy_core::scenario::{ControlPair, Scenario, StateBins};
use glevy_core::uncertainty::{JumpMeasure, UncertaintySet};
use glevy_core::{Error, SeedTriple};
use nalgebra::DMatrix;
use std::sync::Arc;

fn constant(horizon: f64) -> Scenario {
    Scenario::constant(horizon, ControlPair::new(0, 0))
}

#[test]
fn identity_vol_without_jumps_has_exact_covariation() {
    let set = UncertaintySet::new(2, vec![JumpMeasure::zero(2)], vec![DMatrix::identity(2, 2)]).unwrap();
    let grid = TimeGrid::new(2.0, 1.0 / 64.0).unwrap();
    let p = simulate_driver(&constant(2.0), &set, grid, SeedTriple::new(1, 0, 0)).unwrap();
    assert_eq!(p.qv_at(grid.steps), &[2.0, 0.0, 0.0, 2.0]);
    assert!(p.events.is_empty());
}

#[test]
fn scalar_vol_two_gives_four_t() {
    let set = UncertaintySet::scalar(vec![JumpMeasure::zero(1)], &[2.0]).unwrap();
    let grid = TimeGrid::new(1.0, 1.0 / 128.0).unwrap();
    let p = simulate_driver(&constant(1.0), &set, grid, SeedTriple::new(3, 0, 9)).unwrap();
    assert_eq!(p.qv_at(grid.steps)[0], 4.0);
    // Increments scale the Brownian draws by Q.
    for i in 0..grid.steps {
        assert_eq!(p.db_at(i)[0], 2.0 * p.dw[i]);
    }
}

#[test]
fn poisson_mean_jump_count() {
    let set = UncertaintySet::scalar(vec![JumpMeasure::dirac(vec![1.0], 3.0).unwrap()], &[1.0]).unwrap();
    let grid = TimeGrid::new(1.0, 1.0 / 16.0).unwrap();
    let n = 10_000;
    let counts: Vec<f64> = (0..n)
        .map(|p| {
            simulate_driver(&constant(1.0), &set, grid, SeedTriple::new(77, 0, p))
                .unwrap()
                .events
                .len() as f64
        })
        .collect();
    let mean = counts.iter().sum::<f64>() / n as f64;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    assert!((mean - 3.0).abs() <= 3.0 * (var / n as f64).sqrt(), "mean {mean}");
}

#[test]
fn jumps_match_marks_and_steps() {
    let set = UncertaintySet::scalar(
        vec![JumpMeasure::atomic(1, vec![(vec![0.5], 1.0), (vec![-1.2], 2.0)]).unwrap()],
        &[1.0],
    )
    .unwrap();
    let grid = TimeGrid::new(1.0, 1.0 / 32.0).unwrap();
    let p = simulate_driver(&constant(1.0), &set, grid, SeedTriple::new(5, 0, 2)).unwrap();
    assert!(!p.events.is_empty());
    for e in &p.events {
        assert!(e.time > grid.time(e.step) && e.time <= grid.time(e.step + 1));
        assert!(e.mark[0] == 0.5 || e.mark[0] == -1.2);
    }
    for i in 0..grid.steps {
        let jumps: f64 = p.events_in_step(i).iter().map(|e| e.mark[0]).sum();
        let expect = p.x_at(i)[0] + p.db_at(i)[0] + jumps;
        assert!((p.x_at(i + 1)[0] - expect).abs() < 1e-14);
    }
}

#[test]
fn random_measure_sum_examples() {
    let set = UncertaintySet::scalar(vec![JumpMeasure::dirac(vec![1.0], 5.0).unwrap()], &[1.0]).unwrap();
    let grid = TimeGrid::new(1.0, 1.0 / 8.0).unwrap();
    let p = simulate_driver(&constant(1.0), &set, grid, SeedTriple::new(11, 0, 0)).unwrap();
    let count = random_measure_sum(&p, |_, _| 1.0, 0, grid.steps).unwrap();
    assert_eq!(count, p.events.len() as f64);
    assert_eq!(random_measure_sum(&p, |_, u| u[0], 3, 3).unwrap(), 0.0);
    assert!(random_measure_sum(&p, |_, _| 1.0, 4, 2).is_err());

    let set = UncertaintySet::scalar(
        vec![JumpMeasure::atomic(1, vec![(vec![0.5], 1.0), (vec![-1.2], 1.0)]).unwrap()],
        &[1.0],
    )
    .unwrap();
    let p = simulate_driver(&constant(1.0), &set, grid, SeedTriple::new(11, 0, 4)).unwrap();
    let by_hand: f64 = p.events.iter().map(|e| e.mark[0]).sum();
    assert_eq!(random_measure_sum(&p, |_, u| u[0], 0, grid.steps).unwrap(), by_hand);
}

#[test]
fn same_seed_is_bit_identical() {
    let set = presets::reference_set().unwrap();
    let grid = TimeGrid::new(1.0, 1.0 / 64.0).unwrap();
    let scn = Scenario::feedback(
        vec![0.0, 0.5, 1.0],
        StateBins::new(-1.0, 1.0, 2).unwrap(),
        vec![
            vec![ControlPair::new(0, 0), ControlPair::new(0, 1)],
            vec![ControlPair::new(0, 1), ControlPair::new(0, 0)],
        ],
    )
    .unwrap();
    let seed = SeedTriple::new(42, 3, 17);
    let a = simulate_driver(&scn, &set, grid, seed).unwrap();
    let b = simulate_driver(&scn, &set, grid, seed).unwrap();
    assert_eq!(a, b);
    let ya = simulate_sde(&presets::ornstein_uhlenbeck(1.0), a, &[0.2]).unwrap();
    let yb = simulate_sde(&presets::ornstein_uhlenbeck(1.0), b, &[0.2]).unwrap();
    assert_eq!(ya, yb);
}

#[test]
fn covariation_is_monotone_and_additive() {
    let set = presets::reference_set().unwrap();
    let grid = TimeGrid::new(1.0, 1.0 / 64.0).unwrap();
    let scn = Scenario::fixed(vec![0.0, 0.25, 1.0], vec![ControlPair::new(0, 1), ControlPair::new(0, 0)]).unwrap();
    let p = simulate_driver(&scn, &set, grid, SeedTriple::new(8, 0, 0)).unwrap();
    for i in 0..grid.steps {
        assert!(p.qv_at(i + 1)[0] >= p.qv_at(i)[0]);
    }
    let total: f64 = (0..grid.steps).map(|i| p.dqv_at(i)[0]).sum();
    assert!((total - p.qv_at(grid.steps)[0]).abs() < 1e-15);
    assert!((p.qv_at(grid.steps)[0] - (0.25 + 0.75 * 0.25)).abs() < 1e-15);
}

#[test]
fn pure_driver_equals_x_exactly() {
    let set = presets::reference_set().unwrap();
    let grid = TimeGrid::new(1.0, 1.0 / 128.0).unwrap();
    let p = simulate_driver(&constant(1.0), &set, grid, SeedTriple::new(2, 0, 5)).unwrap();
    let x = p.x.clone();
    let r = simulate_sde(&CoefficientSet::pure_driver(1), p, &[0.0]).unwrap();
    assert_eq!(r.y, x);
}

#[test]
fn unit_drift_walks_linearly() {
    let set = presets::reference_set().unwrap();
    let grid = TimeGrid::new(1.0, 1.0 / 128.0).unwrap();
    let p = simulate_driver(&constant(1.0), &set, grid, SeedTriple::new(2, 0, 5)).unwrap();
    let c = CoefficientSet::zero(1).with_drift(Arc::new(|_, _, o: &mut [f64]| o[0] = 1.0));
    let r = simulate_sde(&c, p, &[0.5]).unwrap();
    for i in 0..=grid.steps {
        assert_eq!(r.y_at(i)[0], 0.5 + grid.time(i));
    }
}

#[test]
fn jump_uses_pre_jump_state() {
    let set = UncertaintySet::scalar(vec![JumpMeasure::dirac(vec![1.0], 4.0).unwrap()], &[1.0]).unwrap();
    let grid = TimeGrid::new(1.0, 1.0 / 4.0).unwrap();
    let p = simulate_driver(&constant(1.0), &set, grid, SeedTriple::new(9, 0, 1)).unwrap();
    let n_events = p.events.len();
    assert!(n_events > 0);
    // f(x, u) = x·u doubles the state at each jump.
    let c = CoefficientSet::zero(1).with_jump(Arc::new(|_, x, u, o: &mut [f64]| o[0] = x[0] * u[0]));
    let r = simulate_sde(&c, p, &[1.0]).unwrap();
    assert_eq!(r.y_terminal()[0], 2f64.powi(n_events as i32));
    for s in &r.jump_states {
        assert_eq!(s.post[0], 2.0 * s.pre[0]);
    }
}

#[test]
fn blow_up_reports_time_and_seed() {
    let set = presets::reference_set().unwrap();
    let grid = TimeGrid::new(1.0, 1.0 / 64.0).unwrap();
    let seed = SeedTriple::new(4, 2, 6);
    let p = simulate_driver(&constant(1.0), &set, grid, seed).unwrap();
    let c = CoefficientSet::zero(1).with_drift(Arc::new(|_, x, o: &mut [f64]| o[0] = 1e300 * (1.0 + x[0] * x[0])));
    match simulate_sde(&c, p, &[1.0]) {
        Err(Error::BlowUp { time, seed: s }) => {
            assert!(time > 0.0 && time <= 1.0);
            assert_eq!(s, seed);
        }
        other => panic!("expected blow-up, got {other:?}"),
    }
}

#[test]
fn control_grid_must_sit_on_simulation_grid() {
    let set = presets::reference_set().unwrap();
    let scn = Scenario::fixed(vec![0.0, 0.3, 1.0], vec![ControlPair::new(0, 0), ControlPair::new(0, 1)]).unwrap();
    let grid = TimeGrid::new(1.0, 0.25).unwrap();
    assert!(simulate_driver(&scn, &set, grid, SeedTriple::new(1, 0, 0)).is_err());
    assert!(TimeGrid::new(1.0, -0.1).is_err());
}

#[test]
fn lipschitz_drift_passes_with_unit_constant() {
    let set = presets::reference_set().unwrap();
    let c = CoefficientSet::zero(1).with_drift(Arc::new(|_, x, o: &mut [f64]| o[0] = x[0]));
    let rep = validate_coefficients(&c, &set, 200, ProbeBox { lo: -2.0, hi: 2.0, horizon: 1.0 }, 3).unwrap();
    assert!(rep.report.passed);
    assert!((rep.lipschitz_constant - 1.0).abs() < 1e-6, "{}", rep.lipschitz_constant);
}

#[test]
fn square_root_drift_is_flagged() {
    let set = presets::reference_set().unwrap();
    let c = CoefficientSet::zero(1).with_drift(Arc::new(|_, x, o: &mut [f64]| o[0] = x[0].abs().sqrt()));
    let rep = validate_coefficients(&c, &set, 200, ProbeBox { lo: -2.0, hi: 2.0, horizon: 1.0 }, 3).unwrap();
    assert!(!rep.report.condition("lipschitz").unwrap().passed);
    assert!(!rep.warnings.is_empty());
}

#[test]
fn multiplicative_jump_has_unit_constant() {
    let set = presets::reference_set().unwrap();
    let c = CoefficientSet::zero(1).with_jump(Arc::new(|_, x, u, o: &mut [f64]| o[0] = x[0] * u[0]));
    let rep = validate_coefficients(&c, &set, 200, ProbeBox { lo: -2.0, hi: 2.0, horizon: 1.0 }, 3).unwrap();
    assert!(rep.report.passed);
    assert!((rep.lipschitz_constant - 1.0).abs() < 1e-6);
}

#[test]
fn csv_dumps_have_expected_columns() {
    let set = presets::reference_set().unwrap();
    let grid = TimeGrid::new(1.0, 0.25).unwrap();
    let p = simulate_driver(&constant(1.0), &set, grid, SeedTriple::new(1, 0, 0)).unwrap();
    let r = simulate_sde(&CoefficientSet::pure_driver(1), p, &[0.0]).unwrap();
    let mut buf = Vec::new();
    write_path_csv(&r, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("t,X1,B1,QV11,Y1\n"));
    assert_eq!(text.lines().count(), 6);
    let mut buf = Vec::new();
    write_events_csv(&r, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), r.driver.events.len() + 1);
}
