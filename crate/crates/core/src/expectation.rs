//! Scenario-sup Monte Carlo estimators of `Ē[ξ] = sup_θ E^θ[ξ]` and of the
//! capacity `C̄(D) = sup_θ P^θ(D)`.
//!
//! Every scenario is evaluated on the same noise at each path index, so the
//! estimator is itself a sublinear functional of the payoff: monotone,
//! subadditive, positively homogeneous and constant-translating up to
//! floating-point rounding.

use crate::error::{Error, Result};
use crate::paths::{simulate_sde, CoefficientSet, DriverNoise, PathRecord, TimeGrid};
use crate::scenario::{EnumeratedFamily, Scenario, Selection};
use crate::uncertainty::UncertaintySet;
use crate::SeedTriple;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// What is simulated on top of the driver.
#[derive(Debug, Clone)]
pub enum Dynamics {
    /// `Y = y0 + X`.
    PureDriver { y0: Vec<f64> },
    Sde {
        coefficients: CoefficientSet,
        y0: Vec<f64>,
    },
}

impl Dynamics {
    pub fn pure(dim: usize) -> Self {
        Dynamics::PureDriver { y0: vec![0.0; dim] }
    }

    fn parts(&self, dim: usize) -> (CoefficientSet, &[f64]) {
        match self {
            Dynamics::PureDriver { y0 } => (CoefficientSet::pure_driver(dim), y0),
            Dynamics::Sde { coefficients, y0 } => (coefficients.clone(), y0),
        }
    }
}

/// Simulation inputs shared by every scenario.
#[derive(Debug, Clone)]
pub struct Simulation<'a> {
    pub set: &'a UncertaintySet,
    pub dynamics: Dynamics,
    pub grid: TimeGrid,
    pub n_paths: usize,
    pub master_seed: u64,
}

impl<'a> Simulation<'a> {
    pub fn new(set: &'a UncertaintySet, dynamics: Dynamics, grid: TimeGrid, n_paths: usize, master_seed: u64) -> Self {
        Self {
            set,
            dynamics,
            grid,
            n_paths,
            master_seed,
        }
    }

    fn step_maps(&self, scenarios: &[Scenario]) -> Result<Vec<Vec<usize>>> {
        scenarios
            .iter()
            .map(|s| {
                s.validate(self.set)?;
                crate::paths::driver::control_steps(s, &self.grid)
            })
            .collect()
    }

    /// Simulates one path of one scenario.
    pub fn record(&self, scenario: &Scenario, scenario_index: usize, path: usize) -> Result<PathRecord> {
        let maps = self.step_maps(std::slice::from_ref(scenario))?;
        let noise = DriverNoise::draw(self.set, self.grid, self.master_seed, path);
        let (coeffs, y0) = self.dynamics.parts(self.set.dim());
        let driver = crate::paths::driver::assemble(&noise, scenario, &maps[0], self.set, scenario_index);
        simulate_sde(&coeffs, driver, y0)
    }

    /// `n_paths` records, path `p` simulated under scenario `p mod |family|`.
    pub fn round_robin(&self, family: &EnumeratedFamily) -> Result<Vec<PathRecord>> {
        let maps = self.step_maps(&family.scenarios)?;
        let (coeffs, y0) = self.dynamics.parts(self.set.dim());
        let s = family.scenarios.len();
        (0..self.n_paths)
            .into_par_iter()
            .map(|p| {
                let k = p % s;
                let noise = DriverNoise::draw(self.set, self.grid, self.master_seed, p);
                let driver = crate::paths::driver::assemble(&noise, &family.scenarios[k], &maps[k], self.set, k);
                simulate_sde(&coeffs, driver, y0)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioStat {
    pub mean: f64,
    pub std_error: f64,
    pub paths: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustEstimate {
    pub value: f64,
    pub argmax_scenario: usize,
    pub per_scenario: Vec<ScenarioStat>,
    pub truncated: bool,
}

impl RobustEstimate {
    pub fn argmax_stat(&self) -> &ScenarioStat {
        &self.per_scenario[self.argmax_scenario]
    }
}

fn stats(values: impl Iterator<Item = f64> + Clone, n: usize) -> ScenarioStat {
    let (lo, hi) = values
        .clone()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo == hi {
        return ScenarioStat {
            mean: lo,
            std_error: 0.0,
            paths: n,
        };
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    ScenarioStat {
        mean,
        std_error: (ss / (n as f64 - 1.0) / n as f64).sqrt(),
        paths: n,
    }
}

/// Payload type accepted by [`sublinear_expectations`].
pub type Payoff<'p> = &'p (dyn Fn(&PathRecord) -> f64 + Sync);

/// Estimates several payoffs at once on the same simulated paths.
pub fn sublinear_expectations(
    payoffs: &[Payoff<'_>],
    family: &EnumeratedFamily,
    sim: &Simulation<'_>,
) -> Result<Vec<RobustEstimate>> {
    if sim.n_paths < 2 {
        return Err(Error::InvalidInput("at least two paths are required".into()));
    }
    if family.scenarios.is_empty() {
        return Err(Error::InvalidInput("scenario family is empty".into()));
    }
    let maps = sim.step_maps(&family.scenarios)?;
    let (coeffs, y0) = sim.dynamics.parts(sim.set.dim());
    let ns = family.scenarios.len();
    let np = payoffs.len();

    // rows[p][s * np + j] = payoff j on path p under scenario s.
    let rows: Vec<Vec<f64>> = (0..sim.n_paths)
        .into_par_iter()
        .map(|p| {
            let noise = DriverNoise::draw(sim.set, sim.grid, sim.master_seed, p);
            let mut row = Vec::with_capacity(ns * np);
            for (s, scn) in family.scenarios.iter().enumerate() {
                let driver = crate::paths::driver::assemble(&noise, scn, &maps[s], sim.set, s);
                let record = simulate_sde(&coeffs, driver, y0)?;
                for payoff in payoffs {
                    let v = payoff(&record);
                    if !v.is_finite() {
                        return Err(Error::NonFinitePayoff {
                            seed: SeedTriple::new(sim.master_seed, s, p),
                        });
                    }
                    row.push(v);
                }
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let n = sim.n_paths;
    Ok((0..np)
        .map(|j| {
            let per_scenario: Vec<ScenarioStat> = (0..ns)
                .map(|s| stats(rows.iter().map(|r| r[s * np + j]), n))
                .collect();
            let mut best = 0;
            for (s, st) in per_scenario.iter().enumerate() {
                if st.mean > per_scenario[best].mean {
                    best = s;
                }
            }
            RobustEstimate {
                value: per_scenario[best].mean,
                argmax_scenario: best,
                per_scenario,
                truncated: family.truncated,
            }
        })
        .collect())
}

/// `Ē[ξ]` as the largest per-scenario Monte Carlo mean; ties go to the lowest
/// scenario index.
pub fn sublinear_expectation<P>(payoff: P, family: &EnumeratedFamily, sim: &Simulation<'_>) -> Result<RobustEstimate>
where
    P: Fn(&PathRecord) -> f64 + Sync,
{
    let mut out = sublinear_expectations(&[&payoff], family, sim)?;
    Ok(out.remove(0))
}

/// `C̄(D)` for the event `D`.
pub fn capacity<E>(event: E, family: &EnumeratedFamily, sim: &Simulation<'_>) -> Result<RobustEstimate>
where
    E: Fn(&PathRecord) -> bool + Sync,
{
    sublinear_expectation(|r| if event(r) { 1.0 } else { 0.0 }, family, sim)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub coarse: RobustEstimate,
    pub fine: RobustEstimate,
    pub combined_std_error: f64,
    /// `fine ≥ coarse − 2 · combined_std_error`.
    pub monotone: bool,
}

/// The control `(ν, Q)` that `scn` applies on `[t, ·)` in state bin `bin`.
fn resolved(scn: &Scenario, t: f64, bin: Option<usize>) -> crate::scenario::ControlPair {
    let i = scn.interval_at(t);
    match (&scn.selection, bin) {
        (Selection::Fixed(p), _) => p[i],
        (Selection::Feedback { table, .. }, Some(b)) => table[i][b],
        (Selection::Feedback { table, .. }, None) => table[i][0],
    }
}

fn bins_of(s: &Scenario) -> Option<&crate::scenario::StateBins> {
    match &s.selection {
        Selection::Feedback { bins, .. } => Some(bins),
        Selection::Fixed(_) => None,
    }
}

fn equivalent(a: &Scenario, set_a: &UncertaintySet, b: &Scenario, set_b: &UncertaintySet) -> Result<bool> {
    let bin_count = match (bins_of(a), bins_of(b)) {
        (Some(x), Some(y)) if x != y => {
            return Err(Error::NotNested(
                "feedback families with different state bins cannot be compared".into(),
            ))
        }
        (Some(x), _) | (_, Some(x)) => Some(x.count),
        (None, None) => None,
    };
    let mut grid: Vec<f64> = a.time_grid.iter().chain(&b.time_grid).cloned().collect();
    grid.sort_by(|x, y| x.partial_cmp(y).unwrap());
    grid.dedup_by(|x, y| (*x - *y).abs() <= 1e-12);
    for &t in &grid[..grid.len() - 1] {
        for bin in 0..bin_count.unwrap_or(1) {
            let bin = bin_count.map(|_| bin);
            let pa = resolved(a, t, bin);
            let pb = resolved(b, t, bin);
            if !(set_a.same_jump(pa.jump, set_b, pb.jump) && set_a.same_vol(pa.vol, set_b, pb.vol)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Checks that every coarse scenario applies the same controls as some fine
/// scenario.
pub fn check_nested(
    coarse: &EnumeratedFamily,
    coarse_set: &UncertaintySet,
    fine: &EnumeratedFamily,
    fine_set: &UncertaintySet,
) -> Result<()> {
    for (i, c) in coarse.scenarios.iter().enumerate() {
        let mut found = false;
        for f in &fine.scenarios {
            if equivalent(c, coarse_set, f, fine_set)? {
                found = true;
                break;
            }
        }
        if !found {
            return Err(Error::NotNested(format!(
                "coarse scenario {i} has no counterpart in the fine family"
            )));
        }
    }
    Ok(())
}

/// Estimates `Ē[ξ]` on a coarse and a nested fine family with common random
/// numbers and reports whether refinement is monotone up to Monte Carlo
/// noise.
pub fn refine_and_compare<P>(
    payoff: P,
    coarse: (&EnumeratedFamily, &Simulation<'_>),
    fine: (&EnumeratedFamily, &Simulation<'_>),
) -> Result<RefinementReport>
where
    P: Fn(&PathRecord) -> f64 + Sync,
{
    check_nested(coarse.0, coarse.1.set, fine.0, fine.1.set)?;
    let c = sublinear_expectation(&payoff, coarse.0, coarse.1)?;
    let f = sublinear_expectation(&payoff, fine.0, fine.1)?;
    let combined = (c.argmax_stat().std_error.powi(2) + f.argmax_stat().std_error.powi(2)).sqrt();
    Ok(RefinementReport {
        monotone: f.value >= c.value - 2.0 * combined,
        combined_std_error: combined,
        coarse: c,
        fine: f,
    })
}
