//! Core objects assembled from a parsed configuration.

use crate::config::{ExperimentConfig, FamilyKind, Preset};
use crate::expr::Expr;
use glevy_core::functional::{FunctionalSpec, Window};
use glevy_core::paths::{CoefficientSet, StateFn, TimeGrid};
use glevy_core::pide::{DecompositionSpec, PideWitness};
use glevy_core::presets;
use glevy_core::scenario::{ScenarioFamily, StateBins};
use glevy_core::uncertainty::{JumpMeasure, UncertaintySet};
use glevy_core::Result;
use nalgebra::DMatrix;
use std::sync::Arc;

pub fn uncertainty_set(cfg: &ExperimentConfig) -> Result<UncertaintySet> {
    let u = &cfg.uncertainty;
    let d = u.dim;
    let jumps = u
        .jumps
        .iter()
        .map(|atoms| {
            if atoms.is_empty() {
                Ok(JumpMeasure::zero(d))
            } else {
                JumpMeasure::atomic(d, atoms.clone())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let vols = u.vols.iter().map(|v| DMatrix::from_row_slice(d, d, v)).collect();
    let set = UncertaintySet::new(d, jumps, vols)?;
    Ok(match u.ellipticity {
        Some(floor) => set.with_ellipticity(floor),
        None => set,
    })
}

pub fn time_grid(cfg: &ExperimentConfig) -> Result<TimeGrid> {
    TimeGrid::new(cfg.numerics.horizon, cfg.numerics.dt)
}

pub fn window(cfg: &ExperimentConfig, grid: &TimeGrid) -> Result<Window> {
    let end = cfg.functional.end.unwrap_or(cfg.numerics.horizon);
    Window::from_times(cfg.functional.start, end, grid)
}

pub fn family(cfg: &ExperimentConfig) -> Result<ScenarioFamily> {
    let s = &cfg.scenarios;
    let fam = match s.family {
        FamilyKind::Single => ScenarioFamily::single(),
        FamilyKind::Product => ScenarioFamily::product_lattice(s.intervals, s.cap),
        FamilyKind::Feedback => {
            let bins = StateBins::new(s.bin_lo, s.bin_hi, s.bins)?.on_component(s.bin_component - 1);
            ScenarioFamily::feedback_lattice(s.intervals, bins, s.cap)
        }
    };
    Ok(fam.with_truncation(s.truncate))
}

fn state_fn(exprs: &[Expr]) -> StateFn {
    let exprs = exprs.to_vec();
    Arc::new(move |t, x, o: &mut [f64]| {
        for (slot, e) in o.iter_mut().zip(&exprs) {
            *slot = e.eval(t, x, &[]);
        }
    })
}

fn time_fn(exprs: &[Expr]) -> Arc<dyn Fn(f64, &mut [f64]) + Send + Sync> {
    let exprs = exprs.to_vec();
    Arc::new(move |t, o: &mut [f64]| {
        for (slot, e) in o.iter_mut().zip(&exprs) {
            *slot = e.eval(t, &[], &[]);
        }
    })
}

/// Coefficients, start point and the optional `(F, V)` pair of an experiment.
#[derive(Debug, Clone)]
pub struct Model {
    pub coefficients: CoefficientSet,
    pub y0: Vec<f64>,
    pub spec: Option<FunctionalSpec>,
    pub witness: Option<PideWitness>,
}

pub fn model(cfg: &ExperimentConfig, set: &UncertaintySet) -> Result<Model> {
    let d = cfg.uncertainty.dim;
    let c = &cfg.coefficients;
    let mut m = match c.preset {
        Some(Preset::PureDriver) => {
            let (witness, spec) = if d == 1 {
                let (w, s) = presets::exponential_pure_driver(set)?;
                (Some(w), Some(s))
            } else {
                (None, None)
            };
            Model {
                coefficients: presets::pure_driver(d),
                y0: vec![0.0; d],
                spec,
                witness,
            }
        }
        Some(Preset::Ou) => Model {
            coefficients: presets::ornstein_uhlenbeck(c.theta),
            y0: vec![0.0],
            spec: None,
            witness: None,
        },
        Some(Preset::Manufactured1d) => {
            let p = presets::manufactured_1d(set, cfg.numerics.horizon)?;
            Model {
                coefficients: p.coefficients().clone(),
                y0: p.y0.clone(),
                spec: Some(p.spec().clone()),
                witness: Some(p.witness),
            }
        }
        Some(Preset::SpecialCase1d) => {
            let p = presets::special_case_1d(set, cfg.numerics.horizon)?;
            Model {
                coefficients: p.coefficients,
                y0: p.y0,
                spec: Some(p.spec),
                witness: Some(p.case.witness()),
            }
        }
        None => {
            let mut cs = CoefficientSet::zero(d);
            if let Some(b) = &c.b {
                cs = cs.with_drift(state_fn(b));
            }
            if let Some(h) = &c.h {
                cs = cs.with_covariation(state_fn(h));
            }
            if let Some(s) = &c.sigma {
                cs = cs.with_diffusion(state_fn(s));
            }
            if let Some(f) = &c.f {
                let f = f.clone();
                cs = cs.with_jump(Arc::new(move |t, x, u, o: &mut [f64]| {
                    for (slot, e) in o.iter_mut().zip(&f) {
                        *slot = e.eval(t, x, u);
                    }
                }));
            }
            Model {
                coefficients: cs,
                y0: vec![0.0; d],
                spec: None,
                witness: None,
            }
        }
    };
    if let Some(y0) = &c.y0 {
        m.y0 = y0.clone();
    }
    let f = &cfg.functional;
    if !f.is_empty() {
        let mut spec = FunctionalSpec::new(d, f.alpha.unwrap_or(1.0), f.beta.unwrap_or(1.0), f.gamma.unwrap_or(1.0));
        if let Some(g1) = &f.g1 {
            spec = spec.with_g1(state_fn(g1));
        }
        if let Some(g2) = &f.g2 {
            spec = spec.with_g2(state_fn(g2));
        }
        if let Some(g3) = &f.g3 {
            let g3 = g3.clone();
            spec = spec.with_g3(Arc::new(move |t, x, u| g3.eval(t, x, u)));
        }
        m.spec = Some(spec);
    }
    if let Some(v) = &cfg.witness {
        let v = v.clone();
        m.witness = Some(PideWitness::new(d, Arc::new(move |t, x| v.eval(t, x, &[]))));
    }
    Ok(m)
}

pub fn decomposition(cfg: &ExperimentConfig) -> DecompositionSpec {
    let k = &cfg.decomposition;
    DecompositionSpec {
        gamma: k.gamma.clone().map(|e| Arc::new(move |t, x: &[f64]| e.eval(t, x, &[])) as _),
        phi: k.phi.as_deref().map(time_fn),
        psi: k.psi.as_deref().map(time_fn),
        kernel: k.kernel.clone().map(|e| Arc::new(move |t, u: &[f64]| e.eval(t, &[], u)) as _),
    }
}
