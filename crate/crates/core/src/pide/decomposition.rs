use crate::error::{Error, Result};
use crate::paths::{packed_index, packed_len, simulate_driver, TimeGrid};
use crate::rng::SeedTriple;
use crate::scenario::EnumeratedFamily;
use crate::uncertainty::UncertaintySet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// `(t, X_t) -> Γ`.
pub type DriftFn = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;
/// `(t, out)`.
pub type TimeVecFn = Arc<dyn Fn(f64, &mut [f64]) + Send + Sync>;
/// `(t, u) -> K`.
pub type MarkFn = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;

/// Integrands of
/// `Z_t = ∫ Γ dr + ∫ Φ_ij d⟨B^i,B^j⟩ + ∫ ⟨Ψ, dB⟩ + ∫∫ K L(dr, du)`.
///
/// `phi` writes the packed upper triangle. Missing integrands are zero.
#[derive(Clone, Default)]
pub struct DecompositionSpec {
    pub gamma: Option<DriftFn>,
    pub phi: Option<TimeVecFn>,
    pub psi: Option<TimeVecFn>,
    pub kernel: Option<MarkFn>,
}

impl fmt::Debug for DecompositionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DecompositionSpec")
            .field("gamma", &self.gamma.is_some())
            .field("phi", &self.phi.is_some())
            .field("psi", &self.psi.is_some())
            .field("kernel", &self.kernel.is_some())
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDecomposition {
    pub scenario: usize,
    pub max_abs_z: f64,
    /// Fraction of paths with `Z_T ≠ 0`.
    pub nonzero_fraction: f64,
    pub nonzero_std_error: f64,
    /// `Σ ⟨Δ⟨B⟩ Ψ, Ψ⟩`, identical on every path of the scenario.
    pub quadratic_form: f64,
    /// `ι Σ |Ψ|² Δt`.
    pub lower_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    /// `"zero"` iff `max_t |Z_t| ≤ 1e-12` on every simulated path.
    pub verdict: String,
    pub max_abs_z: f64,
    pub bound_holds: bool,
    pub scenarios: Vec<ScenarioDecomposition>,
    /// Path attaining `max_abs_z`.
    pub worst_seed: SeedTriple,
}

/// Threshold below which `Z` counts as identically zero.
pub const ZERO_TOL: f64 = 1e-12;

struct PathZ {
    max_abs: f64,
    terminal: f64,
    form: f64,
    bound: f64,
    seed: SeedTriple,
}

/// Simulates `Z` on `n_paths` paths of every scenario.
pub fn decomposition_check(
    spec: &DecompositionSpec,
    set: &UncertaintySet,
    family: &EnumeratedFamily,
    grid: TimeGrid,
    n_paths: usize,
    master_seed: u64,
) -> Result<DecompositionReport> {
    if !set.is_elliptic() || set.ellipticity_floor() <= 0.0 {
        return Err(Error::NotElliptic("the decomposition check needs a floor ι > 0".into()));
    }
    if n_paths < 2 || family.scenarios.is_empty() {
        return Err(Error::InvalidInput("need at least two paths and one scenario".into()));
    }
    let d = set.dim();
    let iota = set.ellipticity_floor();
    let mut scenarios = Vec::with_capacity(family.scenarios.len());
    let mut worst = (0.0f64, SeedTriple::new(master_seed, 0, 0));
    let mut bound_holds = true;

    for (s, scn) in family.scenarios.iter().enumerate() {
        let paths: Vec<PathZ> = (0..n_paths)
            .into_par_iter()
            .map(|p| {
                let seed = SeedTriple::new(master_seed, s, p);
                let drv = simulate_driver(scn, set, grid, seed)?;
                let mut phi = vec![0.0; packed_len(d)];
                let mut psi = vec![0.0; d];
                let (mut z, mut max_abs, mut form, mut bound) = (0.0f64, 0.0f64, 0.0, 0.0);
                for i in 0..grid.steps {
                    let t = grid.time(i);
                    if let Some(g) = &spec.gamma {
                        z += g(t, drv.x_at(i)) * grid.dt;
                    }
                    let dqv = drv.dqv_at(i);
                    if let Some(f) = &spec.phi {
                        f(t, &mut phi);
                        for a in 0..d {
                            for b in 0..d {
                                z += phi[packed_index(a, b, d)] * dqv[a * d + b];
                            }
                        }
                    }
                    if let Some(f) = &spec.psi {
                        f(t, &mut psi);
                        z += psi.iter().zip(drv.db_at(i)).map(|(a, b)| a * b).sum::<f64>();
                        let mut q = 0.0;
                        for a in 0..d {
                            for b in 0..d {
                                q += dqv[a * d + b] * psi[a] * psi[b];
                            }
                        }
                        form += q;
                        bound += psi.iter().map(|v| v * v).sum::<f64>() * grid.dt;
                    }
                    if let Some(k) = &spec.kernel {
                        for ev in drv.events_in_step(i) {
                            z += k(ev.time, &ev.mark);
                        }
                    }
                    max_abs = max_abs.max(z.abs());
                }
                if !z.is_finite() {
                    return Err(Error::NonFinite(format!("Z on path {seed}")));
                }
                Ok(PathZ {
                    max_abs,
                    terminal: z,
                    form,
                    bound: iota * bound,
                    seed,
                })
            })
            .collect::<Result<_>>()?;

        let n = paths.len() as f64;
        let nonzero = paths.iter().filter(|p| p.terminal.abs() > ZERO_TOL).count() as f64 / n;
        let mut max_abs = 0.0f64;
        for p in &paths {
            if p.max_abs > worst.0 {
                worst = (p.max_abs, p.seed);
            }
            max_abs = max_abs.max(p.max_abs);
            bound_holds &= p.form >= p.bound * (1.0 - 1e-12);
        }
        scenarios.push(ScenarioDecomposition {
            scenario: s,
            max_abs_z: max_abs,
            nonzero_fraction: nonzero,
            nonzero_std_error: (nonzero * (1.0 - nonzero) / n).sqrt(),
            quadratic_form: paths[0].form,
            lower_bound: paths[0].bound,
        });
    }

    Ok(DecompositionReport {
        verdict: if worst.0 <= ZERO_TOL { "zero" } else { "nonzero" }.into(),
        max_abs_z: worst.0,
        bound_holds,
        scenarios,
        worst_seed: worst.1,
    })
}
