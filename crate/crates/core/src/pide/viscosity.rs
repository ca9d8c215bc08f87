use crate::error::{Error, Result};
use crate::uncertainty::UncertaintySet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Uniform space-time grid for the explicit scheme.
///
/// Outside `[x_min, x_max]` the nonlocal term extends `v` by its boundary
/// value; the diffusion stencil uses the same extension as a ghost node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PideGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub nodes: usize,
    pub horizon: f64,
    pub steps: usize,
}

impl PideGrid {
    pub fn new(x_min: f64, x_max: f64, nodes: usize, horizon: f64, steps: usize) -> Result<Self> {
        if nodes < 3 || steps == 0 || !(x_min < x_max) || !(horizon > 0.0) {
            return Err(Error::InvalidInput(
                "grid needs at least 3 nodes, one step and a non-empty box".into(),
            ));
        }
        Ok(Self {
            x_min,
            x_max,
            nodes,
            horizon,
            steps,
        })
    }

    /// The smallest step count satisfying the stability bound for `set`.
    pub fn stable(x_min: f64, x_max: f64, nodes: usize, horizon: f64, set: &UncertaintySet) -> Result<Self> {
        let probe = Self::new(x_min, x_max, nodes, horizon, 1)?;
        let limit = probe.stability_limit(set);
        let steps = ((horizon / limit) * (1.0 + 1e-12)).ceil().max(1.0) as usize;
        Self::new(x_min, x_max, nodes, horizon, steps)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nodes - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        if j == self.nodes - 1 {
            self.x_max
        } else {
            self.x_min + j as f64 * self.dx()
        }
    }

    /// `Δx² / (max_Q tr QQ* + Δx² max_ν λ_ν)`.
    pub fn stability_limit(&self, set: &UncertaintySet) -> f64 {
        let dx2 = self.dx() * self.dx();
        dx2 / (set.max_trace() + dx2 * set.max_jump_mass())
    }
}

/// `v(t_n, x_j)` on the saved time levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueSurface {
    pub xs: Vec<f64>,
    pub times: Vec<f64>,
    /// `values[n][j]`.
    pub values: Vec<Vec<f64>>,
}

impl ValueSurface {
    pub fn final_values(&self) -> &[f64] {
        self.values.last().expect("surface has at least one level")
    }

    fn interp(&self, level: &[f64], x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return level[0];
        }
        if x >= self.xs[n - 1] {
            return level[n - 1];
        }
        let dx = self.xs[1] - self.xs[0];
        let s = (x - self.xs[0]) / dx;
        let j = (s.floor() as usize).min(n - 2);
        let w = s - j as f64;
        level[j] * (1.0 - w) + level[j + 1] * w
    }

    /// Linear interpolation in `x` on the saved level closest to `t`.
    pub fn value_at(&self, t: f64, x: f64) -> f64 {
        let mut best = 0;
        for (n, &tn) in self.times.iter().enumerate() {
            if (tn - t).abs() < (self.times[best] - t).abs() {
                best = n;
            }
        }
        self.interp(&self.values[best], x)
    }

    /// Rows `t, x, v`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "x", "v"])?;
        for (t, level) in self.times.iter().zip(&self.values) {
            for (x, v) in self.xs.iter().zip(level) {
                w.write_record([t.to_string(), x.to_string(), v.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Interpolation stencil for `ṽ(x_j + u)`: `(left index, right weight)`.
#[derive(Clone, Copy)]
struct Tap {
    left: usize,
    w: f64,
    weight: f64,
}

fn taps(grid: &PideGrid, set: &UncertaintySet) -> Vec<Vec<Vec<Tap>>> {
    let n = grid.nodes;
    let dx = grid.dx();
    set.jump_family()
        .iter()
        .map(|nu| {
            (0..n)
                .map(|j| {
                    nu.nodes()
                        .iter()
                        .map(|(u, weight)| {
                            let s = (grid.x(j) + u[0] - grid.x_min) / dx;
                            let (left, w) = if s <= 0.0 {
                                (0, 0.0)
                            } else if s >= (n - 1) as f64 {
                                (n - 2, 1.0)
                            } else {
                                let l = (s.floor() as usize).min(n - 2);
                                (l, s - l as f64)
                            };
                            Tap {
                                left,
                                w,
                                weight: *weight,
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Explicit monotone scheme for `∂_t v = G_X[v(t, x + ·) − v(t, x)]`,
/// `v(0, ·) = φ`:
///
/// ```text
/// v_j ← v_j + Δt max_{ν,Q} [ Σ w (ṽ(x_j + u) − v_j) + ½ QQ* D²v_j ]
/// ```
///
/// Saves every `save_every`-th level and the last one.
pub fn solve_viscosity_pide<P>(phi: P, set: &UncertaintySet, grid: &PideGrid, save_every: usize) -> Result<ValueSurface>
where
    P: Fn(f64) -> f64,
{
    if set.dim() != 1 {
        return Err(Error::Dimension("the finite-difference solver is one-dimensional".into()));
    }
    let limit = grid.stability_limit(set);
    let dt = grid.dt();
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::Unstable { dt, limit });
    }
    let n = grid.nodes;
    let xs: Vec<f64> = (0..n).map(|j| grid.x(j)).collect();
    let mut v: Vec<f64> = xs.iter().map(|&x| phi(x)).collect();
    if v.iter().any(|a| !a.is_finite()) {
        return Err(Error::NonFinite("payoff on the grid".into()));
    }
    let dx2 = grid.dx() * grid.dx();
    let covs: Vec<f64> = (0..set.vol_family().len()).map(|m| set.covariance(m)[0]).collect();
    let taps = taps(grid, set);
    let save_every = save_every.max(1);

    let mut times = vec![0.0];
    let mut values = vec![v.clone()];
    let mut next = vec![0.0; n];
    for step in 1..=grid.steps {
        next.par_iter_mut().enumerate().for_each(|(j, out)| {
            let vj = v[j];
            let left = if j == 0 { v[0] } else { v[j - 1] };
            let right = if j == n - 1 { v[n - 1] } else { v[j + 1] };
            let d2 = (left - 2.0 * vj + right) / dx2;
            let mut best = f64::NEG_INFINITY;
            for per_node in &taps {
                let jump: f64 = per_node[j]
                    .iter()
                    .map(|t| t.weight * (v[t.left] * (1.0 - t.w) + v[t.left + 1] * t.w - vj))
                    .sum();
                for &c in &covs {
                    best = best.max(jump + 0.5 * c * d2);
                }
            }
            *out = vj + dt * best;
        });
        std::mem::swap(&mut v, &mut next);
        if step % save_every == 0 || step == grid.steps {
            times.push(if step == grid.steps { grid.horizon } else { step as f64 * dt });
            values.push(v.clone());
        }
    }
    if v.iter().any(|a| !a.is_finite()) {
        return Err(Error::NonFinite("value surface".into()));
    }
    Ok(ValueSurface { xs, times, values })
}
