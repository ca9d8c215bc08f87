use super::coefficients::{packed_index, packed_len, CoefficientSet};
use super::driver::DriverPath;
use crate::error::{Error, Result};
use crate::rng::SeedTriple;
use serde::{Deserialize, Serialize};

/// State around one jump event: `Y_{r-}` and `Y_r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpState {
    pub pre: Vec<f64>,
    pub post: Vec<f64>,
}

/// A simulated trajectory of the SDE together with its driver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub driver: DriverPath,
    /// `Y` on the grid, `(steps + 1) × dim`.
    pub y: Vec<f64>,
    /// Aligned with `driver.events`.
    pub jump_states: Vec<JumpState>,
}

impl PathRecord {
    pub fn dim(&self) -> usize {
        self.driver.dim
    }

    pub fn steps(&self) -> usize {
        self.driver.steps()
    }

    pub fn seed(&self) -> SeedTriple {
        self.driver.seed
    }

    pub fn y_at(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.y[i * d..(i + 1) * d]
    }

    pub fn y_terminal(&self) -> &[f64] {
        self.y_at(self.steps())
    }

    pub fn x_terminal(&self) -> &[f64] {
        self.driver.x_at(self.steps())
    }

    /// `sup_t |Y_t|²` over grid nodes and post-jump states.
    pub fn sup_norm_sq(&self) -> f64 {
        let d = self.dim();
        let sq = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>();
        let nodes = self.y.chunks(d).map(sq).fold(0.0, f64::max);
        self.jump_states
            .iter()
            .map(|s| sq(&s.post).max(sq(&s.pre)))
            .fold(nodes, f64::max)
    }
}

/// Explicit Euler scheme driven by `driver`.
///
/// On step `i` the continuous part
/// `b(t_i,Y_i)Δt + Σ_ij h_ij(t_i,Y_i) Δ⟨B^i,B^j⟩_i + σ(t_i,Y_i) ΔB_i` is
/// applied first, then the jumps of `(t_i, t_{i+1}]` in time order, each as
/// `Y ← Y + f(r, Y_{r-}, u)`.
pub fn simulate_sde(c: &CoefficientSet, driver: DriverPath, y0: &[f64]) -> Result<PathRecord> {
    let d = driver.dim;
    if c.dim() != d || y0.len() != d {
        return Err(Error::Dimension(format!(
            "coefficients of dimension {}, initial value of dimension {}, driver of dimension {d}",
            c.dim(),
            y0.len()
        )));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial value".into()));
    }
    let n = driver.steps();
    let dt = driver.grid.dt;
    let np = packed_len(d);
    let mut y = Vec::with_capacity((n + 1) * d);
    y.extend_from_slice(y0);
    let mut jump_states = Vec::with_capacity(driver.events.len());

    let mut drift = vec![0.0; d];
    let mut cov = vec![0.0; np * d];
    let mut sigma = vec![0.0; d * d];
    let mut jump = vec![0.0; d];
    let mut next = vec![0.0; d];

    for i in 0..n {
        let t = driver.time(i);
        let cur = &y[i * d..(i + 1) * d];
        next.copy_from_slice(cur);

        if c.has_drift() {
            c.drift(t, cur, &mut drift);
            for k in 0..d {
                next[k] += drift[k] * dt;
            }
        }
        if c.has_covariation() {
            c.covariation(t, cur, &mut cov);
            let dqv = driver.dqv_at(i);
            for a in 0..d {
                for b in a..d {
                    let w = if a == b { 1.0 } else { 2.0 } * dqv[a * d + b];
                    let block = &cov[packed_index(a, b, d) * d..][..d];
                    for k in 0..d {
                        next[k] += block[k] * w;
                    }
                }
            }
        }
        if c.has_diffusion() {
            c.diffusion(t, cur, &mut sigma);
            let db = driver.db_at(i);
            for r in 0..d {
                let mut acc = 0.0;
                for col in 0..d {
                    acc += sigma[r * d + col] * db[col];
                }
                next[r] += acc;
            }
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp {
                time: driver.time(i + 1),
                seed: driver.seed,
            });
        }
        for ev in driver.events_in_step(i) {
            let pre = next.clone();
            c.jump(ev.time, &pre, &ev.mark, &mut jump);
            for k in 0..d {
                next[k] += jump[k];
            }
            if next.iter().any(|v| !v.is_finite()) {
                return Err(Error::BlowUp {
                    time: ev.time,
                    seed: driver.seed,
                });
            }
            jump_states.push(JumpState {
                pre,
                post: next.clone(),
            });
        }
        y.extend_from_slice(&next);
    }

    Ok(PathRecord {
        driver,
        y,
        jump_states,
    })
}
