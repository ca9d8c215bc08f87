//! The path functional
//!
//! ```text
//! F_{s,t} = ∫ α G(g₁) dr + ∫ β g₁ d⟨B⟩ + ∫ g₂ dB + Σ g₃(r, Y_{r-}, ΔX_r)
//!           + ∫ sup_ν ∫ γ g₃(r, Y_r, u) ν(du) dr
//! ```
//!
//! discretised with left-endpoint sums on the simulation grid, and its
//! comparison against `V(t, Y_t) − V(s, Y_s)`.

use crate::error::{Error, Result};
use crate::paths::{packed_index, packed_len, PathRecord, StateFn, TimeGrid};
use crate::pide::PideWitness;
use crate::rng::SeedTriple;
use crate::uncertainty::{g_of_flat, sup_jump_integral, UncertaintySet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;
use std::sync::Arc;

/// `(t, x, u) -> g₃(t, x, u)`.
pub type ScalarJumpFn = Arc<dyn Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync>;

/// Integrands and constants of `F`. Missing integrands are zero.
///
/// `g1` writes the packed upper triangle (`packed_len(d)` values), `g2`
/// writes `d` values.
#[derive(Clone)]
pub struct FunctionalSpec {
    pub dim: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub g1: Option<StateFn>,
    pub g2: Option<StateFn>,
    pub g3: Option<ScalarJumpFn>,
}

impl fmt::Debug for FunctionalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionalSpec")
            .field("dim", &self.dim)
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .field("gamma", &self.gamma)
            .field("g1", &self.g1.is_some())
            .field("g2", &self.g2.is_some())
            .field("g3", &self.g3.is_some())
            .finish()
    }
}

/// Which integrand a perturbation touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Integrand {
    G1,
    G2,
    G3,
}

impl FunctionalSpec {
    pub fn new(dim: usize, alpha: f64, beta: f64, gamma: f64) -> Self {
        Self {
            dim,
            alpha,
            beta,
            gamma,
            g1: None,
            g2: None,
            g3: None,
        }
    }

    pub fn with_g1(mut self, f: StateFn) -> Self {
        self.g1 = Some(f);
        self
    }

    pub fn with_g2(mut self, f: StateFn) -> Self {
        self.g2 = Some(f);
        self
    }

    pub fn with_g3(mut self, f: ScalarJumpFn) -> Self {
        self.g3 = Some(f);
        self
    }

    /// Adds the constant `size` to every entry of one integrand.
    pub fn perturbed(&self, which: Integrand, size: f64) -> Self {
        let mut out = self.clone();
        let d = self.dim;
        match which {
            Integrand::G1 => {
                let base = self.g1.clone();
                out.g1 = Some(Arc::new(move |t, x, o: &mut [f64]| {
                    match &base {
                        Some(f) => f(t, x, o),
                        None => o.fill(0.0),
                    }
                    o.iter_mut().for_each(|v| *v += size);
                }));
            }
            Integrand::G2 => {
                let base = self.g2.clone();
                out.g2 = Some(Arc::new(move |t, x, o: &mut [f64]| {
                    match &base {
                        Some(f) => f(t, x, o),
                        None => o[..d].fill(0.0),
                    }
                    o.iter_mut().for_each(|v| *v += size);
                }));
            }
            Integrand::G3 => {
                let base = self.g3.clone();
                out.g3 = Some(Arc::new(move |t, x, u| base.as_ref().map_or(0.0, |f| f(t, x, u)) + size));
            }
        }
        out
    }
}

/// Node indices `start ≤ end` of `[s, t]` on the simulation grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: usize,
    pub end: usize,
}

impl Window {
    pub fn new(start: usize, end: usize, grid: &TimeGrid) -> Result<Self> {
        if start > end || end > grid.steps {
            return Err(Error::InvalidInput(format!(
                "window [{start}, {end}] is not inside a grid of {} steps",
                grid.steps
            )));
        }
        Ok(Self { start, end })
    }

    pub fn full(grid: &TimeGrid) -> Self {
        Self {
            start: 0,
            end: grid.steps,
        }
    }

    /// `s` and `t` must be grid nodes.
    pub fn from_times(s: f64, t: f64, grid: &TimeGrid) -> Result<Self> {
        let node = |v: f64| {
            grid.node_of(v)
                .ok_or_else(|| Error::InvalidInput(format!("time {v} is not a node of the simulation grid")))
        };
        Self::new(node(s)?, node(t)?, grid)
    }
}

/// `F_{s,t}` split into its five sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValue {
    pub total: f64,
    /// `Σ α G(g₁) Δt`.
    pub time: f64,
    /// `Σ β Σ_ij g₁^{ij} Δ⟨B^i,B^j⟩`.
    pub covariation: f64,
    /// `Σ ⟨g₂, ΔB⟩`.
    pub brownian: f64,
    /// `Σ g₃(r, Y_{r-}, ΔX_r)` over jumps.
    pub jump: f64,
    /// `Σ sup_ν ∫ γ g₃ dν Δt`.
    pub worst_case: f64,
}

fn unpack(packed: &[f64], d: usize, full: &mut [f64]) {
    for i in 0..d {
        for j in 0..d {
            full[i * d + j] = packed[packed_index(i, j, d)];
        }
    }
}

fn finite(v: f64, what: &str, path: &PathRecord) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(format!("{what} term on path {}", path.seed())))
    }
}

/// Evaluates `F_{s,t}` on one simulated path.
pub fn evaluate_functional(
    spec: &FunctionalSpec,
    path: &PathRecord,
    set: &UncertaintySet,
    window: Window,
) -> Result<FunctionalValue> {
    let d = spec.dim;
    if path.dim() != d || set.dim() != d {
        return Err(Error::Dimension(format!(
            "functional of dimension {d}, path of dimension {}, set of dimension {}",
            path.dim(),
            set.dim()
        )));
    }
    Window::new(window.start, window.end, &path.driver.grid)?;
    let dt = path.driver.grid.dt;
    let mut packed = vec![0.0; packed_len(d)];
    let mut full = vec![0.0; d * d];
    let mut g2 = vec![0.0; d];
    let (mut time, mut cov, mut brown, mut jump, mut comp) = (0.0, 0.0, 0.0, 0.0, 0.0);

    for i in window.start..window.end {
        let t = path.driver.time(i);
        let y = path.y_at(i);
        if let Some(g1) = &spec.g1 {
            g1(t, y, &mut packed);
            unpack(&packed, d, &mut full);
            if spec.alpha != 0.0 {
                time += spec.alpha * g_of_flat(&full, set).0 * dt;
            }
            if spec.beta != 0.0 {
                let dqv = path.driver.dqv_at(i);
                let s: f64 = full.iter().zip(dqv).map(|(a, b)| a * b).sum();
                cov += spec.beta * s;
            }
        }
        if let Some(f) = &spec.g2 {
            f(t, y, &mut g2);
            brown += g2.iter().zip(path.driver.db_at(i)).map(|(a, b)| a * b).sum::<f64>();
        }
        if let Some(g3) = &spec.g3 {
            if spec.gamma != 0.0 {
                let (sup, _) = sup_jump_integral(|u| spec.gamma * g3(t, y, u), set)?;
                comp += sup * dt;
            }
        }
    }
    if let Some(g3) = &spec.g3 {
        let lo = path.driver.event_start[window.start];
        let hi = path.driver.event_start[window.end];
        for (ev, st) in path.driver.events[lo..hi].iter().zip(&path.jump_states[lo..hi]) {
            jump += g3(ev.time, &st.pre, &ev.mark);
        }
    }

    let time = finite(time, "time", path)?;
    let covariation = finite(cov, "covariation", path)?;
    let brownian = finite(brown, "Brownian", path)?;
    let jump = finite(jump, "jump", path)?;
    let worst_case = finite(comp, "worst-case jump", path)?;
    Ok(FunctionalValue {
        total: time + covariation + brownian + jump + worst_case,
        time,
        covariation,
        brownian,
        jump,
        worst_case,
    })
}

/// Comparison on one path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub index: usize,
    pub seed: SeedTriple,
    pub functional: f64,
    pub value_increment: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub rows: Vec<ResidualRow>,
    pub max_abs: f64,
    pub mean_abs: f64,
}

impl ResidualReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "master", "scenario", "path", "F", "dV", "residual"])?;
        for r in &self.rows {
            w.write_record([
                r.index.to_string(),
                r.seed.master.to_string(),
                r.seed.scenario.to_string(),
                r.seed.path.to_string(),
                r.functional.to_string(),
                r.value_increment.to_string(),
                r.residual.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `|F_{s,t} − (V(t, Y_t) − V(s, Y_s))|` on every path.
pub fn path_independence_residual(
    spec: &FunctionalSpec,
    witness: &PideWitness,
    paths: &[PathRecord],
    set: &UncertaintySet,
    window: Window,
) -> Result<ResidualReport> {
    if paths.is_empty() {
        return Err(Error::InvalidInput("no paths to check".into()));
    }
    let rows: Vec<ResidualRow> = paths
        .par_iter()
        .enumerate()
        .map(|(index, p)| {
            let f = evaluate_functional(spec, p, set, window)?.total;
            let grid = &p.driver.grid;
            let dv = witness.value(grid.time(window.end), p.y_at(window.end))
                - witness.value(grid.time(window.start), p.y_at(window.start));
            Ok(ResidualRow {
                index,
                seed: p.seed(),
                functional: f,
                value_increment: dv,
                residual: f - dv,
            })
        })
        .collect::<Result<_>>()?;
    let max_abs = rows.iter().map(|r| r.residual.abs()).fold(0.0, f64::max);
    let mean_abs = rows.iter().map(|r| r.residual.abs()).sum::<f64>() / rows.len() as f64;
    Ok(ResidualReport { rows, max_abs, mean_abs })
}

/// Classical rewrite of `F` when `𝒱 = {ν}` and `𝒬 = {I}`:
///
/// ```text
/// F = ∫ (α/2 + β) tr g₁ dr + ∫ g₂ dB + ∫∫ g₃ Ñ(dr, du) + ∫ (1 + γ) ∫ g₃ ν(du) dr
/// ```
///
/// with `Ñ` the compensated jump measure.
pub fn classical_form(
    spec: &FunctionalSpec,
    path: &PathRecord,
    set: &UncertaintySet,
    window: Window,
) -> Result<f64> {
    let d = spec.dim;
    let (nj, nq) = set.family_len();
    if nj != 1 || nq != 1 {
        return Err(Error::InvalidInput(
            "the classical form needs a single jump measure and a single volatility".into(),
        ));
    }
    let q = set.vol(0);
    let identity = (0..d).all(|i| (0..d).all(|j| q[i * d + j] == if i == j { 1.0 } else { 0.0 }));
    if !identity {
        return Err(Error::InvalidInput("the classical form needs Q = I".into()));
    }
    Window::new(window.start, window.end, &path.driver.grid)?;
    let nu = &set.jump_family()[0];
    let dt = path.driver.grid.dt;
    let mut packed = vec![0.0; packed_len(d)];
    let mut g2 = vec![0.0; d];
    let mut total = 0.0;
    for i in window.start..window.end {
        let t = path.driver.time(i);
        let y = path.y_at(i);
        if let Some(g1) = &spec.g1 {
            g1(t, y, &mut packed);
            let tr: f64 = (0..d).map(|k| packed[packed_index(k, k, d)]).sum();
            total += (spec.alpha / 2.0 + spec.beta) * tr * dt;
        }
        if let Some(f) = &spec.g2 {
            f(t, y, &mut g2);
            total += g2.iter().zip(path.driver.db_at(i)).map(|(a, b)| a * b).sum::<f64>();
        }
        if let Some(g3) = &spec.g3 {
            // The compensator of Ñ is added back here; the jump sum below
            // is the uncompensated part.
            let m = nu.integrate(|u| g3(t, y, u))?;
            total += (1.0 + spec.gamma) * m * dt - m * dt;
        }
    }
    if let Some(g3) = &spec.g3 {
        let lo = path.driver.event_start[window.start];
        let hi = path.driver.event_start[window.end];
        for (ev, st) in path.driver.events[lo..hi].iter().zip(&path.jump_states[lo..hi]) {
            total += g3(ev.time, &st.pre, &ev.mark);
        }
    }
    finite(total, "classical", path)
}
