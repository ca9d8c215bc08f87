use super::witness::{Domain, PideWitness};
use crate::error::{Error, Result};
use crate::functional::FunctionalSpec;
use crate::paths::{packed_index, packed_len, CoefficientSet};
use crate::uncertainty::{g_of_flat, sup_jump_integral, UncertaintySet};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Largest absolute residual of each equation over the probe set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemResidual {
    /// `∂_tV + ⟨∂_xV, b⟩ − α G(g₁) − sup_ν ∫ γ g₃ dν`.
    pub drift: f64,
    /// `⟨∂_xV, h_ij⟩ + ½ ⟨∂²_xV σ^i, σ^j⟩ − β g₁^{ij}`, over all `i ≤ j`.
    pub covariation: f64,
    /// `σᵀ ∂_xV − g₂`.
    pub diffusion: f64,
    /// `V(t, x + f(t, x, u)) − V(t, x) − g₃(t, x, u)`.
    pub jump: f64,
    pub probes: usize,
}

impl SystemResidual {
    pub fn max(&self) -> f64 {
        self.drift.max(self.covariation).max(self.diffusion).max(self.jump)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.drift, self.covariation, self.diffusion, self.jump]
    }
}

/// Column `i` of row-major `σ`.
fn column(sigma: &[f64], i: usize, d: usize) -> Vec<f64> {
    (0..d).map(|k| sigma[k * d + i]).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `⟨H a, b⟩` for row-major `H`.
fn quad(h: &[f64], a: &[f64], b: &[f64], d: usize) -> f64 {
    let mut acc = 0.0;
    for r in 0..d {
        for c in 0..d {
            acc += h[r * d + c] * a[c] * b[r];
        }
    }
    acc
}

/// Packed `⟨∂_xV, h_ij⟩ + ½ ⟨∂²_xV σ^i, σ^j⟩`.
fn second_order_source(
    witness: &PideWitness,
    c: &CoefficientSet,
    t: f64,
    x: &[f64],
    grad: &[f64],
) -> Vec<f64> {
    let d = witness.dim();
    let np = packed_len(d);
    let hess = witness.hessian(t, x);
    let mut sigma = vec![0.0; d * d];
    c.diffusion(t, x, &mut sigma);
    let mut h = vec![0.0; np * d];
    c.covariation(t, x, &mut h);
    let cols: Vec<Vec<f64>> = (0..d).map(|i| column(&sigma, i, d)).collect();
    let mut out = vec![0.0; np];
    for i in 0..d {
        for j in i..d {
            let p = packed_index(i, j, d);
            out[p] = dot(grad, &h[p * d..(p + 1) * d]) + 0.5 * quad(&hess, &cols[i], &cols[j], d);
        }
    }
    out
}

fn unpack(packed: &[f64], d: usize) -> Vec<f64> {
    let mut full = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            full[i * d + j] = packed[packed_index(i, j, d)];
        }
    }
    full
}

fn jump_nodes(set: &UncertaintySet) -> Vec<Vec<f64>> {
    set.jump_family()
        .iter()
        .flat_map(|nu| nu.nodes().iter().map(|(u, _)| u.clone()))
        .collect()
}

/// Evaluates the four residuals of the path-independence system at each
/// `(t, x)` probe. The jump equation is checked at every atom or quadrature
/// node of every `ν ∈ 𝒱`.
pub fn pide_system_residual(
    witness: &PideWitness,
    spec: &FunctionalSpec,
    c: &CoefficientSet,
    set: &UncertaintySet,
    probes: &[(f64, Vec<f64>)],
) -> Result<SystemResidual> {
    let d = witness.dim();
    if spec.dim != d || c.dim() != d || set.dim() != d {
        return Err(Error::Dimension("witness, functional, coefficients and set must share d".into()));
    }
    let np = packed_len(d);
    let marks = jump_nodes(set);
    let mut g1 = vec![0.0; np];
    let mut g2 = vec![0.0; d];
    let mut b = vec![0.0; d];
    let mut sigma = vec![0.0; d * d];
    let mut f = vec![0.0; d];
    let mut r = SystemResidual {
        drift: 0.0,
        covariation: 0.0,
        diffusion: 0.0,
        jump: 0.0,
        probes: probes.len(),
    };
    let g3 = |t: f64, x: &[f64], u: &[f64]| spec.g3.as_ref().map_or(0.0, |g| g(t, x, u));

    for (t, x) in probes {
        let (t, x) = (*t, x.as_slice());
        let grad = witness.gradient(t, x);
        match &spec.g1 {
            Some(g) => g(t, x, &mut g1),
            None => g1.fill(0.0),
        }
        c.drift(t, x, &mut b);
        let (sup, _) = sup_jump_integral(|u| spec.gamma * g3(t, x, u), set)?;
        let r1 = witness.time_derivative(t, x) + dot(&grad, &b) - spec.alpha * g_of_flat(&unpack(&g1, d), set).0 - sup;
        r.drift = r.drift.max(r1.abs());

        let src = second_order_source(witness, c, t, x, &grad);
        for p in 0..np {
            r.covariation = r.covariation.max((src[p] - spec.beta * g1[p]).abs());
        }

        c.diffusion(t, x, &mut sigma);
        match &spec.g2 {
            Some(g) => g(t, x, &mut g2),
            None => g2.fill(0.0),
        }
        for k in 0..d {
            let s = dot(&column(&sigma, k, d), &grad);
            r.diffusion = r.diffusion.max((s - g2[k]).abs());
        }

        let v = witness.value(t, x);
        for u in &marks {
            c.jump(t, x, u, &mut f);
            let shifted: Vec<f64> = x.iter().zip(&f).map(|(a, b)| a + b).collect();
            let r4 = witness.value(t, &shifted) - v - g3(t, x, u);
            r.jump = r.jump.max(r4.abs());
        }
    }
    if !r.max().is_finite() {
        return Err(Error::NonFinite("PIDE residual".into()));
    }
    Ok(r)
}

/// `(g₁, g₂, g₃)` and a drift `b` built from `V` so that the system holds.
#[derive(Debug, Clone)]
pub struct Manufactured {
    pub spec: FunctionalSpec,
    /// The input `σ, h, f` with the solved drift.
    pub coefficients: CoefficientSet,
}

/// Solves the system for `(g₁, g₂, g₃, b)` given `V`, `σ`, `h`, `f`:
/// `g₂ = σᵀ∂_xV`, `g₁ = β⁻¹(⟨∂_xV, h⟩ + ½⟨∂²_xV σ^i, σ^j⟩)`,
/// `g₃ = V(t, x + f) − V(t, x)`, and the minimum-norm
/// `b = (α G(g₁) + sup_ν ∫ γ g₃ dν − ∂_tV) ∂_xV / |∂_xV|²`.
///
/// `|∂_xV|` is checked against `gradient_floor` on a probe grid of `domain`.
pub fn manufacture_from_v(
    witness: PideWitness,
    base: &CoefficientSet,
    set: &UncertaintySet,
    alpha: f64,
    beta: f64,
    gamma: f64,
    domain: &Domain,
    gradient_floor: f64,
) -> Result<Manufactured> {
    let d = witness.dim();
    if base.dim() != d || set.dim() != d || domain.dim() != d {
        return Err(Error::Dimension("witness, coefficients, set and domain must share d".into()));
    }
    if beta == 0.0 {
        return Err(Error::InvalidInput("β must be nonzero to solve for g₁".into()));
    }
    witness.check_gradient_floor(&domain.probe_grid(11, 41, 20_000), gradient_floor)?;

    let w = Arc::new(witness);
    let c = base.clone();
    let set = Arc::new(set.clone());
    let np = packed_len(d);

    let g1: Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync> = {
        let (w, c) = (w.clone(), c.clone());
        Arc::new(move |t, x, out: &mut [f64]| {
            let grad = w.gradient(t, x);
            let src = second_order_source(&w, &c, t, x, &grad);
            for p in 0..np {
                out[p] = src[p] / beta;
            }
        })
    };
    let g2 = {
        let (w, c) = (w.clone(), c.clone());
        Arc::new(move |t: f64, x: &[f64], out: &mut [f64]| {
            let grad = w.gradient(t, x);
            let mut sigma = vec![0.0; d * d];
            c.diffusion(t, x, &mut sigma);
            for k in 0..d {
                out[k] = dot(&column(&sigma, k, d), &grad);
            }
        })
    };
    let g3: Arc<dyn Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync> = {
        let (w, c) = (w.clone(), c.clone());
        Arc::new(move |t, x, u| {
            let mut f = vec![0.0; d];
            c.jump(t, x, u, &mut f);
            let shifted: Vec<f64> = x.iter().zip(&f).map(|(a, b)| a + b).collect();
            w.value(t, &shifted) - w.value(t, x)
        })
    };
    let drift = {
        let (g1, g3, w, set) = (g1.clone(), g3.clone(), w.clone(), set.clone());
        Arc::new(move |t: f64, x: &[f64], out: &mut [f64]| {
            let mut p = vec![0.0; np];
            g1(t, x, &mut p);
            let g = g_of_flat(&unpack(&p, d), &set).0;
            let sup = sup_jump_integral(|u| gamma * g3(t, x, u), &set)
                .map(|v| v.0)
                .unwrap_or(f64::NAN);
            let rhs = alpha * g + sup - w.time_derivative(t, x);
            let grad = w.gradient(t, x);
            let n2 = dot(&grad, &grad);
            for k in 0..d {
                out[k] = rhs * grad[k] / n2;
            }
        })
    };

    Ok(Manufactured {
        spec: FunctionalSpec::new(d, alpha, beta, gamma)
            .with_g1(g1)
            .with_g2(g2)
            .with_g3(g3),
        coefficients: c.with_drift(drift),
    })
}
