use glevy_core::scenario::{enumerate_scenarios, ScenarioFamily, StateBins};
use glevy_core::uncertainty::{g_inverse_1d, g_of, sup_jump_integral, JumpMeasure, UncertaintySet};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

fn two_d_set() -> UncertaintySet {
    let vols = vec![
        DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.5]),
        DMatrix::from_row_slice(2, 2, &[0.7, 0.3, -0.2, 0.9]),
        DMatrix::from_row_slice(2, 2, &[0.2, 0.0, 0.4, 1.1]),
    ];
    UncertaintySet::new(2, vec![JumpMeasure::zero(2)], vols).unwrap()
}

fn jump_set() -> UncertaintySet {
    UncertaintySet::scalar(
        vec![
            JumpMeasure::atomic(1, vec![(vec![0.5], 1.0), (vec![-1.0], 2.0)]).unwrap(),
            JumpMeasure::atomic(1, vec![(vec![1.5], 0.3), (vec![0.2], 1.2), (vec![-0.4], 0.1)]).unwrap(),
            JumpMeasure::dirac(vec![2.0], 0.8).unwrap(),
        ],
        &[1.0],
    )
    .unwrap()
}

fn sym(v: [f64; 3]) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[v[0], v[1], v[1], v[2]])
}

fn entries() -> impl Strategy<Value = [f64; 3]> {
    [-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64]
}

proptest! {
    #[test]
    fn g_is_sublinear(a in entries(), b in entries()) {
        let set = two_d_set();
        let (ga, _) = g_of(&sym(a), &set).unwrap();
        let (gb, _) = g_of(&sym(b), &set).unwrap();
        let (gab, _) = g_of(&(sym(a) + sym(b)), &set).unwrap();
        prop_assert!(gab <= ga + gb + 1e-12 * (1.0 + ga.abs() + gb.abs()));
    }

    #[test]
    fn g_is_positively_homogeneous(a in entries(), lambda in 0.0..10.0f64) {
        let set = two_d_set();
        let (ga, _) = g_of(&sym(a), &set).unwrap();
        let (gl, _) = g_of(&(sym(a) * lambda), &set).unwrap();
        prop_assert!(close(gl, lambda * ga));
    }

    #[test]
    fn g_is_monotone(a in entries(), p in [-2.0..2.0f64, -2.0..2.0f64]) {
        // Adding the positive semidefinite p pᵀ never lowers G.
        let set = two_d_set();
        let psd = DMatrix::from_row_slice(2, 2, &[p[0] * p[0], p[0] * p[1], p[0] * p[1], p[1] * p[1]]);
        let (ga, _) = g_of(&sym(a), &set).unwrap();
        let (gb, _) = g_of(&(sym(a) + psd), &set).unwrap();
        prop_assert!(gb >= ga - 1e-12 * (1.0 + ga.abs()));
    }

    #[test]
    fn sup_jump_integral_is_sublinear(c in [-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64], lambda in 0.0..10.0f64) {
        let set = jump_set();
        let f = |u: &[f64]| c[0] * u[0] + c[1] * u[0] * u[0];
        let g = |u: &[f64]| c[2] * u[0].sin();
        let (sf, _) = sup_jump_integral(f, &set).unwrap();
        let (sg, _) = sup_jump_integral(g, &set).unwrap();
        let (sfg, _) = sup_jump_integral(|u| f(u) + g(u), &set).unwrap();
        let (sl, _) = sup_jump_integral(|u| lambda * f(u), &set).unwrap();
        prop_assert!(sfg <= sf + sg + 1e-12 * (1.0 + sf.abs() + sg.abs()));
        prop_assert!(close(sl, lambda * sf));
    }

    #[test]
    fn g_inverse_round_trips(y in -10.0..10.0f64) {
        let set = UncertaintySet::scalar(vec![JumpMeasure::zero(1)], &[0.5, 1.0, 0.8]).unwrap().with_ellipticity(0.25);
        let a = g_inverse_1d(y, &set).unwrap();
        let (back, _) = g_of(&DMatrix::from_element(1, 1, a), &set).unwrap();
        prop_assert!(close(back, y));
    }

    #[test]
    fn enumeration_is_deterministic(intervals in 1usize..4, cap in 1usize..200) {
        let set = jump_set();
        let fam = ScenarioFamily::product_lattice(intervals, cap).with_truncation(true);
        let a = enumerate_scenarios(&fam, &set, 1.0).unwrap();
        let b = enumerate_scenarios(&fam, &set, 1.0).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.scenarios.len(), 3usize.pow(intervals as u32).min(cap));
        prop_assert_eq!(a.truncated, 3usize.pow(intervals as u32) > cap);
    }

    #[test]
    fn bins_cover_every_state(x in -100.0..100.0f64, count in 1usize..10) {
        let bins = StateBins::new(-1.0, 2.0, count).unwrap();
        prop_assert!(bins.bin(&[x]) < count);
    }
}

#[test]
fn enumeration_without_truncation_refuses_large_families() {
    let fam = ScenarioFamily::product_lattice(5, 10);
    assert!(enumerate_scenarios(&fam, &jump_set(), 1.0).is_err());
}
