//! Driver simulation and the Euler scheme for
//! `dY = b dt + h_ij d⟨B^i,B^j⟩ + σ dB + ∫ f(t, Y_{t-}, u) L(dt, du)`.

mod coefficients;
pub(crate) mod driver;
mod dump;
mod sde;

pub use coefficients::{packed_index, packed_len, validate_coefficients, CoefficientReport, CoefficientSet, JumpFn, ProbeBox, StateFn};
pub use driver::{random_measure_sum, simulate_driver, DriverNoise, DriverPath, JumpEvent, LatentEvent};
pub use dump::{write_events_csv, write_path_csv};
pub use sde::{simulate_sde, JumpState, PathRecord};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Uniform simulation grid on `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub horizon: f64,
    pub steps: usize,
    pub dt: f64,
}

impl TimeGrid {
    /// `dt` must divide `horizon`.
    pub fn new(horizon: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidInput(format!("horizon must be positive, got {horizon}")));
        }
        let ratio = horizon / dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) || steps < 1.0 {
            return Err(Error::InvalidInput(format!(
                "dt = {dt} does not divide the horizon {horizon}"
            )));
        }
        Ok(Self {
            horizon,
            steps: steps as usize,
            dt,
        })
    }

    pub fn with_steps(horizon: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidInput("at least one step is required".into()));
        }
        Self::new(horizon, horizon / steps as f64)
    }

    /// Time of node `i`; the last node is exactly `horizon`.
    pub fn time(&self, i: usize) -> f64 {
        if i >= self.steps {
            self.horizon
        } else {
            i as f64 * self.dt
        }
    }

    /// Node index of time `t`, if `t` lies on the grid.
    pub fn node_of(&self, t: f64) -> Option<usize> {
        let r = t / self.dt;
        let i = r.round();
        if (r - i).abs() <= 1e-9 * r.abs().max(1.0) && i >= 0.0 && i as usize <= self.steps {
            Some(i as usize)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_divisibility() {
        let g = TimeGrid::new(1.0, 0.25).unwrap();
        assert_eq!(g.steps, 4);
        assert_eq!(g.time(4), 1.0);
        assert_eq!(g.node_of(0.5), Some(2));
        assert_eq!(g.node_of(0.3), None);
        assert!(TimeGrid::new(1.0, 0.3).is_err());
        assert!(TimeGrid::new(1.0, 0.0).is_err());
        assert!(TimeGrid::new(1.0, -0.1).is_err());
    }
}
