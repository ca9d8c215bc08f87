//! One function per subcommand. Each returns a report; writing it out is
//! left to the caller.

use crate::config::ExperimentConfig;
use crate::model;
use glevy_core::expectation::{sublinear_expectation, Dynamics, Simulation};
use glevy_core::functional::{classical_form, evaluate_functional, path_independence_residual};
use glevy_core::paths::{validate_coefficients, write_events_csv, write_path_csv, PathRecord, ProbeBox};
use glevy_core::pide::{decomposition_check, solve_viscosity_pide, PideGrid};
use glevy_core::scenario::enumerate_scenarios;
use glevy_core::uncertainty::validate_uncertainty_set;
use glevy_core::{Error, Result};
use serde_json::{json, Value};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Validate,
    Simulate,
    Expect,
    CheckPi,
    PideSolve,
    DecompCheck,
    ReduceClassical,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Simulate => "simulate",
            Command::Expect => "expect",
            Command::CheckPi => "check-pi",
            Command::PideSolve => "pide-solve",
            Command::DecompCheck => "decomp-check",
            Command::ReduceClassical => "reduce-classical",
        }
    }
}

/// What a command produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub summary: String,
    /// Every check passed.
    pub passed: bool,
    /// Failures are input problems rather than threshold misses.
    pub validation: bool,
    pub tables: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    fn new(report: Value, summary: String, passed: bool) -> Self {
        Self {
            report,
            summary,
            passed,
            validation: false,
            tables: Vec::new(),
        }
    }

    fn table(mut self, name: &str, bytes: Vec<u8>) -> Self {
        self.tables.push((name.to_string(), bytes));
        self
    }
}

pub fn run(cmd: Command, cfg: &ExperimentConfig) -> Result<Outcome> {
    match cmd {
        Command::Validate => validate(cfg),
        Command::Simulate => simulate(cfg),
        Command::Expect => expect(cfg),
        Command::CheckPi => check_pi(cfg),
        Command::PideSolve => pide_solve(cfg),
        Command::DecompCheck => decomp_check(cfg),
        Command::ReduceClassical => reduce_classical(cfg),
    }
}

fn numerics_json(cfg: &ExperimentConfig) -> Value {
    let n = &cfg.numerics;
    json!({ "horizon": n.horizon, "dt": n.dt, "paths": n.paths, "seed": n.seed })
}

fn csv_bytes<F>(header: &[&str], fill: F) -> Result<Vec<u8>>
where
    F: FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> std::result::Result<(), csv::Error>,
{
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header)?;
        fill(&mut w)?;
        w.flush()?;
    }
    Ok(buf)
}

fn simulation<'a>(cfg: &ExperimentConfig, set: &'a glevy_core::uncertainty::UncertaintySet) -> Result<Simulation<'a>> {
    let m = model::model(cfg, set)?;
    Ok(Simulation::new(
        set,
        Dynamics::Sde {
            coefficients: m.coefficients,
            y0: m.y0,
        },
        model::time_grid(cfg)?,
        cfg.numerics.paths,
        cfg.numerics.seed,
    ))
}

fn validate(cfg: &ExperimentConfig) -> Result<Outcome> {
    let set = model::uncertainty_set(cfg)?;
    let report = validate_uncertainty_set(&set, cfg.uncertainty.q)?;
    let m = model::model(cfg, &set)?;
    let probe_box = ProbeBox {
        lo: cfg.grid.x_min,
        hi: cfg.grid.x_max,
        horizon: cfg.numerics.horizon,
    };
    let coef = validate_coefficients(&m.coefficients, &set, 256, probe_box, cfg.numerics.seed)?;
    let fam = enumerate_scenarios(&model::family(cfg)?, &set, cfg.numerics.horizon)?;
    model::time_grid(cfg)?;

    let mut summary = String::new();
    for c in report.conditions.iter().chain(&coef.report.conditions) {
        let _ = writeln!(
            summary,
            "{:<20} {}  value {:e}  {}",
            c.name,
            if c.passed { "pass" } else { "FAIL" },
            c.value + 0.0,
            c.note
        );
    }
    for w in &coef.warnings {
        let _ = writeln!(summary, "warning: {w}");
    }
    let _ = writeln!(
        summary,
        "scenario family: {} members{}",
        fam.scenarios.len(),
        if fam.truncated { " (truncated)" } else { "" }
    );
    let passed = report.passed && coef.report.passed;
    let mut out = Outcome::new(
        json!({
            "command": "validate",
            "uncertainty": report,
            "coefficients": coef,
            "scenarios": { "count": fam.scenarios.len(), "truncated": fam.truncated },
            "passed": passed,
        }),
        summary,
        passed,
    );
    out.validation = true;
    Ok(out)
}

fn simulate(cfg: &ExperimentConfig) -> Result<Outcome> {
    let set = model::uncertainty_set(cfg)?;
    let fam = enumerate_scenarios(&model::family(cfg)?, &set, cfg.numerics.horizon)?;
    let sim = simulation(cfg, &set)?;
    let paths = sim.round_robin(&fam)?;
    let d = set.dim();

    let mut header: Vec<String> = vec!["path".into(), "scenario".into(), "jumps".into()];
    header.extend((1..=d).map(|k| format!("y{k}")));
    header.extend((1..=d).map(|k| format!("x{k}")));
    let header_ref: Vec<&str> = header.iter().map(String::as_str).collect();
    let terminal = csv_bytes(&header_ref, |w| {
        for p in &paths {
            let mut row = vec![
                p.seed().path.to_string(),
                p.seed().scenario.to_string(),
                p.driver.events.len().to_string(),
            ];
            row.extend(p.y_terminal().iter().map(f64::to_string));
            row.extend(p.x_terminal().iter().map(f64::to_string));
            w.write_record(&row)?;
        }
        Ok(())
    })?;
    let mut first_path = Vec::new();
    write_path_csv(&paths[0], &mut first_path)?;
    let mut first_events = Vec::new();
    write_events_csv(&paths[0], &mut first_events)?;

    let n = paths.len() as f64;
    let mean: Vec<f64> = (0..d)
        .map(|k| paths.iter().map(|p| p.y_terminal()[k]).sum::<f64>() / n)
        .collect();
    let max_sup = paths.iter().map(PathRecord::sup_norm_sq).fold(0.0, f64::max).sqrt();
    let jumps = paths.iter().map(|p| p.driver.events.len()).sum::<usize>();
    let summary = format!(
        "simulated {} paths over {} scenarios\nmean terminal state {mean:?}\nlargest sup norm {max_sup:e}\ntotal jumps {jumps}\n",
        paths.len(),
        fam.scenarios.len()
    );
    Ok(Outcome::new(
        json!({
            "command": "simulate",
            "numerics": numerics_json(cfg),
            "scenarios": fam.scenarios.len(),
            "mean_terminal": mean,
            "max_sup_norm": max_sup,
            "total_jumps": jumps,
        }),
        summary,
        true,
    )
    .table("terminal.csv", terminal)
    .table("path_0.csv", first_path)
    .table("events_0.csv", first_events))
}

fn payoff(cfg: &ExperimentConfig) -> Result<crate::expr::Expr> {
    cfg.payoff
        .clone()
        .ok_or_else(|| Error::InvalidInput("this command needs [payoff] phi".into()))
}

fn estimate_table(est: &glevy_core::expectation::RobustEstimate) -> Result<Vec<u8>> {
    csv_bytes(&["scenario", "mean", "std_error", "paths"], |w| {
        for (i, s) in est.per_scenario.iter().enumerate() {
            w.write_record([
                i.to_string(),
                s.mean.to_string(),
                s.std_error.to_string(),
                s.paths.to_string(),
            ])?;
        }
        Ok(())
    })
}

fn expect(cfg: &ExperimentConfig) -> Result<Outcome> {
    let phi = payoff(cfg)?;
    let set = model::uncertainty_set(cfg)?;
    let fam = enumerate_scenarios(&model::family(cfg)?, &set, cfg.numerics.horizon)?;
    let sim = simulation(cfg, &set)?;
    let t = cfg.numerics.horizon;
    let est = sublinear_expectation(|p| phi.eval(t, p.y_terminal(), &[]), &fam, &sim)?;
    let best = est.argmax_stat();
    let summary = format!(
        "E[{}] = {} (std error {:e}, scenario {} of {}{})\n",
        phi,
        est.value,
        best.std_error,
        est.argmax_scenario,
        fam.scenarios.len(),
        if est.truncated { ", truncated family" } else { "" }
    );
    Ok(Outcome::new(
        json!({
            "command": "expect",
            "payoff": phi.source(),
            "numerics": numerics_json(cfg),
            "value": est.value,
            "std_error": best.std_error,
            "argmax_scenario": est.argmax_scenario,
            "scenarios": fam.scenarios.len(),
            "truncated": est.truncated,
        }),
        summary,
        true,
    )
    .table("scenarios.csv", estimate_table(&est)?))
}

fn check_pi(cfg: &ExperimentConfig) -> Result<Outcome> {
    let set = model::uncertainty_set(cfg)?;
    let m = model::model(cfg, &set)?;
    let spec = m
        .spec
        .ok_or_else(|| Error::InvalidInput("check-pi needs a [functional] block or a preset that supplies one".into()))?;
    let witness = m
        .witness
        .ok_or_else(|| Error::InvalidInput("check-pi needs [witness] v or a preset that supplies one".into()))?;
    let fam = enumerate_scenarios(&model::family(cfg)?, &set, cfg.numerics.horizon)?;
    let sim = simulation(cfg, &set)?;
    let window = model::window(cfg, &sim.grid)?;
    let paths = sim.round_robin(&fam)?;
    let r = path_independence_residual(&spec, &witness, &paths, &set, window)?;
    let passed = r.max_abs <= cfg.checks.residual;
    let mut table = Vec::new();
    r.write_csv(&mut table)?;
    let worst = r
        .rows
        .iter()
        .max_by(|a, b| a.residual.abs().total_cmp(&b.residual.abs()))
        .map(|row| row.seed);
    let summary = format!(
        "max |F - dV| = {:e} (threshold {:e}), mean {:e} over {} paths: {}\n",
        r.max_abs,
        cfg.checks.residual,
        r.mean_abs,
        r.rows.len(),
        if passed { "pass" } else { "FAIL" }
    );
    Ok(Outcome::new(
        json!({
            "command": "check-pi",
            "numerics": numerics_json(cfg),
            "max_abs_residual": r.max_abs,
            "mean_abs_residual": r.mean_abs,
            "threshold": cfg.checks.residual,
            "worst_path": worst,
            "passed": passed,
        }),
        summary,
        passed,
    )
    .table("residuals.csv", table))
}

fn pide_solve(cfg: &ExperimentConfig) -> Result<Outcome> {
    let phi = payoff(cfg)?;
    let set = model::uncertainty_set(cfg)?;
    let g = &cfg.grid;
    let grid = match g.steps {
        Some(steps) => PideGrid::new(g.x_min, g.x_max, g.nodes, cfg.numerics.horizon, steps)?,
        None => PideGrid::stable(g.x_min, g.x_max, g.nodes, cfg.numerics.horizon, &set)?,
    };
    let f = |x: f64| phi.eval(0.0, &[x], &[]);
    let surface = solve_viscosity_pide(f, &set, &grid, g.save_every)?;
    let m = model::model(cfg, &set)?;
    let x0 = m.y0[0];
    let value = surface.value_at(cfg.numerics.horizon, x0);
    let mut table = Vec::new();
    surface.write_csv(&mut table)?;

    let mut report = json!({
        "command": "pide-solve",
        "payoff": phi.source(),
        "grid": grid,
        "x0": x0,
        "value": value,
    });
    let mut summary = format!(
        "v({}, {x0}) = {value} on {} nodes, {} steps (dt {:e})\n",
        cfg.numerics.horizon,
        grid.nodes,
        grid.steps,
        grid.dt()
    );
    let mut passed = true;
    if g.compare {
        let fam = enumerate_scenarios(&model::family(cfg)?, &set, cfg.numerics.horizon)?;
        let sim = Simulation::new(
            &set,
            Dynamics::PureDriver { y0: vec![x0] },
            model::time_grid(cfg)?,
            cfg.numerics.paths,
            cfg.numerics.seed,
        );
        let est = sublinear_expectation(|p| f(p.y_terminal()[0]), &fam, &sim)?;
        let gap = (value - est.value).abs();
        passed = gap <= cfg.checks.pide_gap;
        report["monte_carlo"] = json!({
            "value": est.value,
            "std_error": est.argmax_stat().std_error,
            "scenarios": fam.scenarios.len(),
            "gap": gap,
            "threshold": cfg.checks.pide_gap,
            "passed": passed,
        });
        let _ = writeln!(
            summary,
            "Monte Carlo {} over {} scenarios, gap {gap:e} (threshold {:e}): {}",
            est.value,
            fam.scenarios.len(),
            cfg.checks.pide_gap,
            if passed { "pass" } else { "FAIL" }
        );
    }
    Ok(Outcome::new(report, summary, passed).table("surface.csv", table))
}

fn decomp_check(cfg: &ExperimentConfig) -> Result<Outcome> {
    let set = model::uncertainty_set(cfg)?;
    let fam = enumerate_scenarios(&model::family(cfg)?, &set, cfg.numerics.horizon)?;
    let spec = model::decomposition(cfg);
    let r = decomposition_check(
        &spec,
        &set,
        &fam,
        model::time_grid(cfg)?,
        cfg.numerics.paths,
        cfg.numerics.seed,
    )?;
    let verdict_ok = cfg.decomposition.expect.as_ref().is_none_or(|e| *e == r.verdict);
    let passed = verdict_ok && r.bound_holds;
    let table = csv_bytes(
        &["scenario", "max_abs_z", "nonzero_fraction", "nonzero_std_error", "quadratic_form", "lower_bound"],
        |w| {
            for s in &r.scenarios {
                w.write_record([
                    s.scenario.to_string(),
                    s.max_abs_z.to_string(),
                    s.nonzero_fraction.to_string(),
                    s.nonzero_std_error.to_string(),
                    s.quadratic_form.to_string(),
                    s.lower_bound.to_string(),
                ])?;
            }
            Ok(())
        },
    )?;
    let summary = format!(
        "verdict {} (max |Z| {:e} on path {}), ellipticity bound {}{}\n",
        r.verdict,
        r.max_abs_z,
        r.worst_seed,
        if r.bound_holds { "holds" } else { "FAILS" },
        match &cfg.decomposition.expect {
            Some(e) if *e != r.verdict => format!(", expected {e}"),
            _ => String::new(),
        }
    );
    Ok(Outcome::new(
        json!({
            "command": "decomp-check",
            "numerics": numerics_json(cfg),
            "verdict": r.verdict,
            "expected": cfg.decomposition.expect,
            "max_abs_z": r.max_abs_z,
            "bound_holds": r.bound_holds,
            "worst_path": r.worst_seed,
            "passed": passed,
        }),
        summary,
        passed,
    )
    .table("decomposition.csv", table))
}

fn reduce_classical(cfg: &ExperimentConfig) -> Result<Outcome> {
    let set = model::uncertainty_set(cfg)?;
    let m = model::model(cfg, &set)?;
    let spec = m.spec.clone().ok_or_else(|| {
        Error::InvalidInput("reduce-classical needs a [functional] block or a preset that supplies one".into())
    })?;
    let fam = enumerate_scenarios(&model::family(cfg)?, &set, cfg.numerics.horizon)?;
    let sim = simulation(cfg, &set)?;
    let window = model::window(cfg, &sim.grid)?;
    let paths = sim.round_robin(&fam)?;
    let rows = paths
        .iter()
        .map(|p| {
            let g = evaluate_functional(&spec, p, &set, window)?.total;
            let c = classical_form(&spec, p, &set, window)?;
            Ok((p.seed().path, g, c))
        })
        .collect::<Result<Vec<_>>>()?;
    let max = rows.iter().map(|(_, g, c)| (g - c).abs()).fold(0.0, f64::max);
    let passed = max <= cfg.checks.classical;
    let table = csv_bytes(&["path", "g_form", "classical_form", "difference"], |w| {
        for (p, g, c) in &rows {
            w.write_record([p.to_string(), g.to_string(), c.to_string(), (g - c).to_string()])?;
        }
        Ok(())
    })?;
    let summary = format!(
        "max pathwise |F_G - F_classical| = {max:e} over {} paths (threshold {:e}): {}\n",
        rows.len(),
        cfg.checks.classical,
        if passed { "pass" } else { "FAIL" }
    );
    Ok(Outcome::new(
        json!({
            "command": "reduce-classical",
            "numerics": numerics_json(cfg),
            "max_discrepancy": max,
            "threshold": cfg.checks.classical,
            "passed": passed,
        }),
        summary,
        passed,
    )
    .table("classical.csv", table))
}
