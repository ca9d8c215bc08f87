//! Named model configurations shared by the test suite and the command line.

use crate::error::Result;
use crate::functional::FunctionalSpec;
use crate::paths::CoefficientSet;
use crate::pide::{
    manufacture_from_v, pure_driver_g, special_case_g, special_case_v, Domain, Manufactured, PideWitness, SpecialCase,
};
use crate::uncertainty::{sup_jump_integral, JumpMeasure, UncertaintySet};
use std::sync::Arc;

/// `𝒱 = {δ₁ with mass 1}`, `𝒬 = {0.5, 1}`, ellipticity floor `0.25`.
pub fn reference_set() -> Result<UncertaintySet> {
    Ok(UncertaintySet::scalar(vec![JumpMeasure::dirac(vec![1.0], 1.0)?], &[0.5, 1.0])?.with_ellipticity(0.25))
}

/// Pure driver: `b = 0, h = 0, σ = I, f = u`.
pub fn pure_driver(dim: usize) -> CoefficientSet {
    CoefficientSet::pure_driver(dim)
}

/// `dY = −θ Y dt + dB + ∫ u L(dt, du)` in one dimension.
pub fn ornstein_uhlenbeck(theta: f64) -> CoefficientSet {
    CoefficientSet::scalar(move |_, x| -theta * x, |_, _| 0.0, |_, _| 1.0, |_, _, u| u)
}

/// Manufactured one-dimensional problem built from
/// `V(t, x) = x + 0.1 sin(x) e^{−t}`.
#[derive(Debug, Clone)]
pub struct ManufacturedPreset {
    pub witness: PideWitness,
    pub manufactured: Manufactured,
    pub domain: Domain,
    pub y0: Vec<f64>,
}

impl ManufacturedPreset {
    pub fn spec(&self) -> &FunctionalSpec {
        &self.manufactured.spec
    }

    pub fn coefficients(&self) -> &CoefficientSet {
        &self.manufactured.coefficients
    }
}

/// `V(t, x) = x + 0.1 sin(x) e^{−t}` with closed-form derivatives.
pub fn manufactured_witness() -> PideWitness {
    PideWitness::new(1, Arc::new(|t, x: &[f64]| x[0] + 0.1 * x[0].sin() * (-t).exp()))
        .with_time_derivative(Arc::new(|t, x: &[f64]| -0.1 * x[0].sin() * (-t).exp()))
        .with_gradient(Arc::new(|t, x: &[f64], o: &mut [f64]| o[0] = 1.0 + 0.1 * x[0].cos() * (-t).exp()))
        .with_hessian(Arc::new(|t, x: &[f64], o: &mut [f64]| o[0] = -0.1 * x[0].sin() * (-t).exp()))
}

/// `σ = 1, h = 0, f = u`, `α = β = γ = 1`, drift solved from `V`.
pub fn manufactured_1d(set: &UncertaintySet, horizon: f64) -> Result<ManufacturedPreset> {
    let witness = manufactured_witness();
    let base = CoefficientSet::scalar(|_, _| 0.0, |_, _| 0.0, |_, _| 1.0, |_, _, u| u);
    let domain = Domain::new(horizon, vec![-10.0], vec![10.0])?;
    let manufactured = manufacture_from_v(witness.clone(), &base, set, 1.0, 1.0, 1.0, &domain, 0.5)?;
    Ok(ManufacturedPreset {
        witness,
        manufactured,
        domain,
        y0: vec![0.0],
    })
}

/// Closed-form case with `h = ½`, `σ = 1`, `V(t, 0) = t/2`,
/// `∂_xV(t, 0) = 1 + t/2`, `b = 0.3 sin x`, `f = u`.
#[derive(Debug, Clone)]
pub struct SpecialPreset {
    pub case: SpecialCase,
    pub spec: FunctionalSpec,
    pub coefficients: CoefficientSet,
    pub domain: Domain,
    pub y0: Vec<f64>,
}

pub fn special_case_1d(set: &UncertaintySet, horizon: f64) -> Result<SpecialPreset> {
    let domain = Domain::new(horizon, vec![-2.0], vec![2.0])?;
    let case = special_case_v(
        Arc::new(|_, _| 0.5),
        Arc::new(|_, _| 1.0),
        Arc::new(|t| 0.5 * t),
        Arc::new(|t| 1.0 + 0.5 * t),
        &domain,
    )?;
    let b = |_: f64, x: f64| 0.3 * x.sin();
    let f = |_: f64, _: f64, u: f64| u;
    let spec = special_case_g(&case, b, f, set)?;
    let coefficients = case.coefficients(b, f);
    Ok(SpecialPreset {
        case,
        spec,
        coefficients,
        domain,
        y0: vec![0.0],
    })
}

/// `V(t, x) = exp(x + a t)` with `a = ½ max q² + max_ν ∫ (e^u − 1) dν`,
/// which solves `∂_tV = G(∂²_xV) + sup_ν ∫ (V(t, x + u) − V(t, x)) ν(du)`
/// because `V` is positive and convex. Paired with the pure driver and
/// `(α, β, γ) = (1, ½, 1)`.
pub fn exponential_pure_driver(set: &UncertaintySet) -> Result<(PideWitness, FunctionalSpec)> {
    let q2 = (0..set.vol_family().len())
        .map(|m| set.covariance(m)[0])
        .fold(f64::NEG_INFINITY, f64::max);
    let (jump, _) = sup_jump_integral(|u| u[0].exp() - 1.0, set)?;
    let a = 0.5 * q2 + jump;
    let witness = PideWitness::new(1, Arc::new(move |t, x: &[f64]| (x[0] + a * t).exp()))
        .with_time_derivative(Arc::new(move |t, x: &[f64]| a * (x[0] + a * t).exp()))
        .with_gradient(Arc::new(move |t, x: &[f64], o: &mut [f64]| o[0] = (x[0] + a * t).exp()))
        .with_hessian(Arc::new(move |t, x: &[f64], o: &mut [f64]| o[0] = (x[0] + a * t).exp()));
    let spec = pure_driver_g(witness.clone());
    Ok((witness, spec))
}
