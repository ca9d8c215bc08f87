use super::witness::{Domain, PideWitness};
use crate::error::{Error, Result};
use crate::functional::FunctionalSpec;
use crate::paths::CoefficientSet;
use crate::quadrature::integrate;
use crate::uncertainty::{g_inverse_1d, UncertaintySet};
use std::sync::Arc;

/// Tolerance of both levels of the nested quadrature.
pub const QUADRATURE_TOL: f64 = 1e-10;

/// `(t, x) -> value`.
pub type Scalar2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// `t -> value`.
pub type Scalar1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// One-dimensional `V` solving `∂_xV h + ½ ∂²_xV σ² = 0`:
///
/// ```text
/// V(t, x) = V(t, 0) + ∂_xV(t, 0) ∫₀ˣ E(t, z) dz,   E(t, z) = exp(−2 ∫₀ᶻ h/σ² dv)
/// ```
#[derive(Clone)]
pub struct SpecialCase {
    pub h: Scalar2,
    pub sigma: Scalar2,
    pub value_at_zero: Scalar1,
    pub slope_at_zero: Scalar1,
}

impl std::fmt::Debug for SpecialCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SpecialCase")
    }
}

impl SpecialCase {
    /// `E(t, z)`.
    pub fn weight(&self, t: f64, z: f64) -> f64 {
        let (h, s) = (&self.h, &self.sigma);
        let inner = integrate(|v| h(t, v) / (s(t, v) * s(t, v)), 0.0, z, QUADRATURE_TOL);
        (-2.0 * inner).exp()
    }

    /// `∫_a^b E(t, z) dz`.
    pub fn weight_integral(&self, t: f64, a: f64, b: f64) -> f64 {
        integrate(|z| self.weight(t, z), a, b, QUADRATURE_TOL)
    }

    pub fn value(&self, t: f64, x: f64) -> f64 {
        (self.value_at_zero)(t) + (self.slope_at_zero)(t) * self.weight_integral(t, 0.0, x)
    }

    pub fn dx(&self, t: f64, x: f64) -> f64 {
        (self.slope_at_zero)(t) * self.weight(t, x)
    }

    pub fn dxx(&self, t: f64, x: f64) -> f64 {
        let s = (self.sigma)(t, x);
        -2.0 * (self.h)(t, x) / (s * s) * self.dx(t, x)
    }

    /// `V` with closed-form `x`-derivatives; `∂_tV` uses the default stencil.
    pub fn witness(&self) -> PideWitness {
        let (a, b, c) = (self.clone(), self.clone(), self.clone());
        PideWitness::new(1, Arc::new(move |t, x: &[f64]| a.value(t, x[0])))
            .with_gradient(Arc::new(move |t, x: &[f64], o: &mut [f64]| o[0] = b.dx(t, x[0])))
            .with_hessian(Arc::new(move |t, x: &[f64], o: &mut [f64]| o[0] = c.dxx(t, x[0])))
    }

    /// `h`, `σ` and the given `b`, `f` as an SDE coefficient set.
    pub fn coefficients<B, F>(&self, b: B, f: F) -> CoefficientSet
    where
        B: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        F: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    {
        let (h, s) = (self.h.clone(), self.sigma.clone());
        CoefficientSet::scalar(b, move |t, x| h(t, x), move |t, x| s(t, x), f)
    }
}

/// Builds the closed-form `V` for given `h`, `σ` and boundary data at
/// `x = 0`. Fails if `σ` vanishes on a probe grid of `domain`.
pub fn special_case_v(
    h: Scalar2,
    sigma: Scalar2,
    value_at_zero: Scalar1,
    slope_at_zero: Scalar1,
    domain: &Domain,
) -> Result<SpecialCase> {
    if domain.dim() != 1 {
        return Err(Error::Dimension("the closed form is one-dimensional".into()));
    }
    for (t, x) in domain.probe_grid(11, 201, 10_000) {
        let s = sigma(t, x[0]);
        if !s.is_finite() || s.abs() < 1e-12 {
            return Err(Error::InvalidInput(format!("σ vanishes at (t = {t}, x = {})", x[0])));
        }
    }
    Ok(SpecialCase {
        h,
        sigma,
        value_at_zero,
        slope_at_zero,
    })
}

/// The `(α, β, γ) = (1, 0, 0)` integrands:
/// `g₁ = G⁻¹(∂_tV + b ∂_xV)`, `g₂ = σ ∂_xV`,
/// `g₃ = ∂_xV(t, 0) ∫_x^{x+f} E(t, z) dz`.
pub fn special_case_g<B, F>(case: &SpecialCase, b: B, f: F, set: &UncertaintySet) -> Result<FunctionalSpec>
where
    B: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    F: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
{
    if set.dim() != 1 {
        return Err(Error::Dimension("the closed form is one-dimensional".into()));
    }
    // Surfaces the non-elliptic error up front.
    g_inverse_1d(1.0, set)?;
    let set = Arc::new(set.clone());
    let witness = Arc::new(case.witness());
    let g1 = {
        let (c, w) = (case.clone(), witness.clone());
        Arc::new(move |t: f64, x: &[f64], o: &mut [f64]| {
            let y = w.time_derivative(t, x) + b(t, x[0]) * c.dx(t, x[0]);
            o[0] = g_inverse_1d(y, &set).unwrap_or(f64::NAN);
        })
    };
    let g2 = {
        let c = case.clone();
        Arc::new(move |t: f64, x: &[f64], o: &mut [f64]| o[0] = (c.sigma)(t, x[0]) * c.dx(t, x[0]))
    };
    let g3 = {
        let c = case.clone();
        Arc::new(move |t: f64, x: &[f64], u: &[f64]| {
            (c.slope_at_zero)(t) * c.weight_integral(t, x[0], x[0] + f(t, x[0], u[0]))
        })
    };
    Ok(FunctionalSpec::new(1, 1.0, 0.0, 0.0)
        .with_g1(g1)
        .with_g2(g2)
        .with_g3(g3))
}

/// The `(α, β, γ) = (1, ½, 1)` integrands for the pure driver,
/// `g₁ = ∂²_xV`, `g₂ = ∂_xV`, `g₃ = V(t, x + u) − V(t, x)`.
pub fn pure_driver_g(witness: PideWitness) -> FunctionalSpec {
    let d = witness.dim();
    let w = Arc::new(witness);
    let (w1, w2, w3) = (w.clone(), w.clone(), w);
    FunctionalSpec::new(d, 1.0, 0.5, 1.0)
        .with_g1(Arc::new(move |t, x, o: &mut [f64]| {
            let h = w1.hessian(t, x);
            for i in 0..d {
                for j in i..d {
                    o[crate::paths::packed_index(i, j, d)] = h[i * d + j];
                }
            }
        }))
        .with_g2(Arc::new(move |t, x, o: &mut [f64]| o.copy_from_slice(&w2.gradient(t, x))))
        .with_g3(Arc::new(move |t, x, u| {
            let shifted: Vec<f64> = x.iter().zip(u).map(|(a, b)| a + b).collect();
            w3.value(t, &shifted) - w3.value(t, x)
        }))
}
