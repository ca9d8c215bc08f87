use super::TimeGrid;
use crate::error::{Error, Result};
use crate::rng::{self, SeedTriple, Substream};
use crate::scenario::{ControlPair, Scenario};
use crate::uncertainty::UncertaintySet;
use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

/// A point of the latent Poisson random measure with intensity
/// `λ_max · Leb[0,1] dt`.
///
/// Under a control using `ν_k` the event is a jump iff
/// `thin < λ_k / λ_max`, with mark drawn from `ν_k / λ_k` by the stream keyed
/// on `mark_word`. This realises every `ν_k` as an image of one base measure,
/// so all scenarios share the same jump randomness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatentEvent {
    pub time: f64,
    pub step: usize,
    pub thin: f64,
    pub mark_word: u64,
}

/// Scenario-independent randomness of one path.
#[derive(Debug, Clone)]
pub struct DriverNoise {
    pub dim: usize,
    pub grid: TimeGrid,
    /// Standard normals, `steps × dim`.
    pub normals: Vec<f64>,
    pub events: Vec<LatentEvent>,
    pub rate: f64,
    pub master: u64,
    pub path: usize,
}

impl DriverNoise {
    pub fn draw(set: &UncertaintySet, grid: TimeGrid, master: u64, path: usize) -> Self {
        let dim = set.dim();
        let mut normal_rng = rng::stream(master, path, Substream::Brownian);
        let normals: Vec<f64> = (0..grid.steps * dim)
            .map(|_| StandardNormal.sample(&mut normal_rng))
            .collect();

        let rate = set.max_jump_mass();
        let mut events = Vec::new();
        if rate > 0.0 && rate.is_finite() {
            let mut jump_rng = rng::stream(master, path, Substream::Jumps);
            let exp = Exp::new(rate).expect("positive rate");
            let mut t = 0.0;
            loop {
                t += exp.sample(&mut jump_rng);
                if t > grid.horizon {
                    break;
                }
                let step = ((t / grid.dt).ceil() as usize).saturating_sub(1).min(grid.steps - 1);
                events.push(LatentEvent {
                    time: t,
                    step,
                    thin: jump_rng.random::<f64>(),
                    mark_word: jump_rng.random::<u64>(),
                });
            }
        }
        Self {
            dim,
            grid,
            normals,
            events,
            rate,
            master,
            path,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub time: f64,
    /// Events of step `i` lie in `(t_i, t_{i+1}]`.
    pub step: usize,
    pub mark: Vec<f64>,
    pub measure: usize,
}

/// One driver trajectory under a fixed scenario.
///
/// Node quantities (`x`, `b`, `qv`) have `steps + 1` entries; increments
/// (`dw`, `db`, `dqv`, `controls`) have `steps`. Vectors are stored flat,
/// matrices row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriverPath {
    pub dim: usize,
    pub grid: TimeGrid,
    pub dw: Vec<f64>,
    pub db: Vec<f64>,
    pub dqv: Vec<f64>,
    pub b: Vec<f64>,
    pub qv: Vec<f64>,
    pub x: Vec<f64>,
    pub controls: Vec<ControlPair>,
    pub events: Vec<JumpEvent>,
    /// `events[event_start[i]..event_start[i + 1]]` belong to step `i`.
    pub event_start: Vec<usize>,
    pub seed: SeedTriple,
}

impl DriverPath {
    pub fn steps(&self) -> usize {
        self.grid.steps
    }

    pub fn time(&self, i: usize) -> f64 {
        self.grid.time(i)
    }

    pub fn x_at(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn b_at(&self, i: usize) -> &[f64] {
        &self.b[i * self.dim..(i + 1) * self.dim]
    }

    pub fn qv_at(&self, i: usize) -> &[f64] {
        let d2 = self.dim * self.dim;
        &self.qv[i * d2..(i + 1) * d2]
    }

    pub fn db_at(&self, i: usize) -> &[f64] {
        &self.db[i * self.dim..(i + 1) * self.dim]
    }

    pub fn dqv_at(&self, i: usize) -> &[f64] {
        let d2 = self.dim * self.dim;
        &self.dqv[i * d2..(i + 1) * d2]
    }

    pub fn events_in_step(&self, i: usize) -> &[JumpEvent] {
        &self.events[self.event_start[i]..self.event_start[i + 1]]
    }

    /// Events with time in `(t_start, t_end]` for node indices `start ≤ end`.
    pub fn events_between(&self, start: usize, end: usize) -> &[JumpEvent] {
        &self.events[self.event_start[start]..self.event_start[end]]
    }
}

/// Maps each simulation step to the control interval containing its left
/// end, checking that the control grid sits on the simulation grid.
pub(crate) fn control_steps(scn: &Scenario, grid: &TimeGrid) -> Result<Vec<usize>> {
    if (scn.horizon() - grid.horizon).abs() > 1e-12 * grid.horizon.max(1.0) {
        return Err(Error::InvalidInput(format!(
            "scenario horizon {} differs from the simulation horizon {}",
            scn.horizon(),
            grid.horizon
        )));
    }
    let mut nodes = Vec::with_capacity(scn.time_grid.len());
    for &g in &scn.time_grid {
        let node = grid.node_of(g).ok_or_else(|| {
            Error::InvalidInput(format!(
                "dt = {} does not divide the control grid point {g}",
                grid.dt
            ))
        })?;
        nodes.push(node);
    }
    let mut map = Vec::with_capacity(grid.steps);
    let mut interval = 0;
    for i in 0..grid.steps {
        while interval + 1 < scn.intervals() && i >= nodes[interval + 1] {
            interval += 1;
        }
        map.push(interval);
    }
    Ok(map)
}

/// Builds the driver path of `scn` from pre-drawn noise.
///
/// The feedback state read on step `i` is `X_{t_i}`, so the control is
/// constant on each simulation step and depends only on the past.
pub(crate) fn assemble(
    noise: &DriverNoise,
    scn: &Scenario,
    step_interval: &[usize],
    set: &UncertaintySet,
    scenario_index: usize,
) -> DriverPath {
    let d = noise.dim;
    let d2 = d * d;
    let grid = noise.grid;
    let n = grid.steps;
    let sqrt_dt = grid.dt.sqrt();

    let mut dw = Vec::with_capacity(n * d);
    let mut db = Vec::with_capacity(n * d);
    let mut dqv = Vec::with_capacity(n * d2);
    let mut b = Vec::with_capacity((n + 1) * d);
    let mut qv = Vec::with_capacity((n + 1) * d2);
    let mut x = Vec::with_capacity((n + 1) * d);
    let mut controls = Vec::with_capacity(n);
    let mut events = Vec::new();
    let mut event_start = Vec::with_capacity(n + 1);
    b.extend(std::iter::repeat_n(0.0, d));
    qv.extend(std::iter::repeat_n(0.0, d2));
    x.extend(std::iter::repeat_n(0.0, d));

    let mut latent = noise.events.iter().peekable();
    let mut inc = vec![0.0; d];
    for i in 0..n {
        let pair = scn.scenario_at(step_interval[i], &x[i * d..(i + 1) * d]);
        controls.push(pair);
        let q = set.vol(pair.vol);
        let cov = set.covariance(pair.vol);

        let z = &noise.normals[i * d..(i + 1) * d];
        for k in 0..d {
            dw.push(sqrt_dt * z[k]);
        }
        let w = &dw[i * d..(i + 1) * d];
        for r in 0..d {
            let mut acc = 0.0;
            for c in 0..d {
                acc += q[r * d + c] * w[c];
            }
            inc[r] = acc;
        }
        db.extend_from_slice(&inc);
        for k in 0..d {
            b.push(b[i * d + k] + inc[k]);
        }
        for k in 0..d2 {
            let v = cov[k] * grid.dt;
            dqv.push(v);
            qv.push(qv[i * d2 + k] + v);
        }

        for k in 0..d {
            x.push(x[i * d + k] + inc[k]);
        }
        event_start.push(events.len());
        let nu = &set.jump_family()[pair.jump];
        let accept = if noise.rate > 0.0 { nu.total_mass() / noise.rate } else { 0.0 };
        while let Some(ev) = latent.next_if(|e| e.step == i) {
            if ev.thin < accept {
                let mark = nu.sample_mark(&mut rng::from_word(ev.mark_word));
                for k in 0..d {
                    x[(i + 1) * d + k] += mark[k];
                }
                events.push(JumpEvent {
                    time: ev.time,
                    step: i,
                    mark,
                    measure: pair.jump,
                });
            }
        }
    }
    event_start.push(events.len());

    DriverPath {
        dim: d,
        grid,
        dw,
        db,
        dqv,
        b,
        qv,
        x,
        controls,
        events,
        event_start,
        seed: SeedTriple::new(noise.master, scenario_index, noise.path),
    }
}

/// Simulates the driver `X = B + X^d` of `scn`.
///
/// Brownian increments and latent jump events depend only on
/// `(seed.master, seed.path)`; `seed.scenario` is recorded on the result.
pub fn simulate_driver(
    scn: &Scenario,
    set: &UncertaintySet,
    grid: TimeGrid,
    seed: SeedTriple,
) -> Result<DriverPath> {
    scn.validate(set)?;
    if !set.max_jump_mass().is_finite() {
        return Err(Error::InvalidInput("jump activity must be finite".into()));
    }
    let map = control_steps(scn, &grid)?;
    let noise = DriverNoise::draw(set, grid, seed.master, seed.path);
    Ok(assemble(&noise, scn, &map, set, seed.scenario))
}

/// `Σ_{s < r ≤ t} f(r, κ_r)` over the recorded jumps, for node indices
/// `start ≤ end`.
pub fn random_measure_sum<F: Fn(f64, &[f64]) -> f64>(path: &DriverPath, f: F, start: usize, end: usize) -> Result<f64> {
    if start > end || end > path.steps() {
        return Err(Error::InvalidInput(format!(
            "window ({start}, {end}] is not inside the grid"
        )));
    }
    Ok(path
        .events_between(start, end)
        .iter()
        .map(|e| f(e.time, &e.mark))
        .sum())
}
