use crate::error::Result;
use crate::rng::{self, Substream};
use crate::uncertainty::{sup_jump_integral, Condition, UncertaintySet, ValidationReport};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// `(t, x, out)`.
pub type StateFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;
/// `(t, x, u, out)`.
pub type JumpFn = Arc<dyn Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync>;

/// Number of entries in the packed upper triangle of a `d×d` symmetric matrix.
pub fn packed_len(d: usize) -> usize {
    d * (d + 1) / 2
}

/// Position of `(i, j)` (either order) in the packed upper triangle.
pub fn packed_index(i: usize, j: usize, d: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * d - i * i.saturating_sub(1) / 2 + (j - i)
}

/// Coefficients `b, h_ij (i ≤ j), σ, f` of the SDE. Missing entries are zero.
///
/// The covariation field writes `packed_len(d)` blocks of `d` values, one
/// block per pair `i ≤ j`, in [`packed_index`] order.
#[derive(Clone)]
pub struct CoefficientSet {
    dim: usize,
    drift: Option<StateFn>,
    covariation: Option<StateFn>,
    diffusion: Option<StateFn>,
    jump: Option<JumpFn>,
}

impl fmt::Debug for CoefficientSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientSet")
            .field("dim", &self.dim)
            .field("drift", &self.drift.is_some())
            .field("covariation", &self.covariation.is_some())
            .field("diffusion", &self.diffusion.is_some())
            .field("jump", &self.jump.is_some())
            .finish()
    }
}

impl CoefficientSet {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            drift: None,
            covariation: None,
            diffusion: None,
            jump: None,
        }
    }

    /// `b = 0, h = 0, σ = I, f(t, x, u) = u`, so that `Y − y0 = X`.
    pub fn pure_driver(dim: usize) -> Self {
        Self::zero(dim)
            .with_diffusion(Arc::new(move |_, _, out: &mut [f64]| {
                out.fill(0.0);
                for i in 0..dim {
                    out[i * dim + i] = 1.0;
                }
            }))
            .with_jump(Arc::new(|_, _, u, out: &mut [f64]| out.copy_from_slice(u)))
    }

    pub fn with_drift(mut self, f: StateFn) -> Self {
        self.drift = Some(f);
        self
    }

    pub fn with_covariation(mut self, f: StateFn) -> Self {
        self.covariation = Some(f);
        self
    }

    pub fn with_diffusion(mut self, f: StateFn) -> Self {
        self.diffusion = Some(f);
        self
    }

    pub fn with_jump(mut self, f: JumpFn) -> Self {
        self.jump = Some(f);
        self
    }

    /// One-dimensional coefficients from scalar closures.
    pub fn scalar<B, H, S, J>(drift: B, covariation: H, diffusion: S, jump: J) -> Self
    where
        B: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        H: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        S: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        J: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self::zero(1)
            .with_drift(Arc::new(move |t, x, o: &mut [f64]| o[0] = drift(t, x[0])))
            .with_covariation(Arc::new(move |t, x, o: &mut [f64]| o[0] = covariation(t, x[0])))
            .with_diffusion(Arc::new(move |t, x, o: &mut [f64]| o[0] = diffusion(t, x[0])))
            .with_jump(Arc::new(move |t, x, u, o: &mut [f64]| o[0] = jump(t, x[0], u[0])))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_drift(&self) -> bool {
        self.drift.is_some()
    }

    pub fn has_covariation(&self) -> bool {
        self.covariation.is_some()
    }

    pub fn has_diffusion(&self) -> bool {
        self.diffusion.is_some()
    }

    pub fn has_jump(&self) -> bool {
        self.jump.is_some()
    }

    pub fn drift(&self, t: f64, x: &[f64], out: &mut [f64]) {
        match &self.drift {
            Some(f) => f(t, x, out),
            None => out.fill(0.0),
        }
    }

    pub fn covariation(&self, t: f64, x: &[f64], out: &mut [f64]) {
        match &self.covariation {
            Some(f) => f(t, x, out),
            None => out.fill(0.0),
        }
    }

    pub fn diffusion(&self, t: f64, x: &[f64], out: &mut [f64]) {
        match &self.diffusion {
            Some(f) => f(t, x, out),
            None => out.fill(0.0),
        }
    }

    pub fn jump(&self, t: f64, x: &[f64], u: &[f64], out: &mut [f64]) {
        match &self.jump {
            Some(f) => f(t, x, u, out),
            None => out.fill(0.0),
        }
    }
}

/// Box `[lo, hi]^d × [0, horizon]` from which validation probes are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeBox {
    pub lo: f64,
    pub hi: f64,
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientReport {
    pub report: ValidationReport,
    /// Largest sampled ratio of the H1 sum to `|x − y|²`.
    pub lipschitz_constant: f64,
    /// Largest sampled H2 sum at the origin.
    pub growth_constant: f64,
    pub warnings: Vec<String>,
}

struct Probe {
    drift: Vec<f64>,
    cov: Vec<f64>,
    diff: Vec<f64>,
}

impl Probe {
    fn new(d: usize) -> Self {
        Self {
            drift: vec![0.0; d],
            cov: vec![0.0; packed_len(d) * d],
            diff: vec![0.0; d * d],
        }
    }

    fn fill(&mut self, c: &CoefficientSet, t: f64, x: &[f64]) {
        c.drift(t, x, &mut self.drift);
        c.covariation(t, x, &mut self.cov);
        c.diffusion(t, x, &mut self.diff);
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// H1 sum `|Δb|² + Σ|Δh_ij|² + ‖Δσ‖² + sup_ν ∫|Δf|² dν` between `x` and `y`.
fn h1_sum(c: &CoefficientSet, set: &UncertaintySet, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    let d = c.dim();
    let mut px = Probe::new(d);
    let mut py = Probe::new(d);
    px.fill(c, t, x);
    py.fill(c, t, y);
    let (jump, _) = sup_jump_integral(
        |u| {
            let mut a = vec![0.0; d];
            let mut b = vec![0.0; d];
            c.jump(t, x, u, &mut a);
            c.jump(t, y, u, &mut b);
            sq_dist(&a, &b)
        },
        set,
    )?;
    Ok(sq_dist(&px.drift, &py.drift) + sq_dist(&px.cov, &py.cov) + sq_dist(&px.diff, &py.diff) + jump)
}

fn h2_sum(c: &CoefficientSet, set: &UncertaintySet, t: f64) -> Result<f64> {
    let d = c.dim();
    let zero = vec![0.0; d];
    let mut p = Probe::new(d);
    p.fill(c, t, &zero);
    let (jump, _) = sup_jump_integral(
        |u| {
            let mut a = vec![0.0; d];
            c.jump(t, &zero, u, &mut a);
            a.iter().map(|v| v * v).sum()
        },
        set,
    )?;
    let sq = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>();
    Ok(sq(&p.drift) + sq(&p.cov) + sq(&p.diff) + jump)
}

/// Samples the Lipschitz (H1, with `ρ(r) = r`) and linear-growth (H2)
/// conditions on random probes in `probe_box`, and flags local ratios that
/// keep growing as probe pairs shrink.
pub fn validate_coefficients(
    c: &CoefficientSet,
    set: &UncertaintySet,
    probes: usize,
    probe_box: ProbeBox,
    seed: u64,
) -> Result<CoefficientReport> {
    let d = c.dim();
    let mut rng = rng::stream(seed, 0, Substream::Probes);
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
        (0..d)
            .map(|_| probe_box.lo + (probe_box.hi - probe_box.lo) * rng.random::<f64>())
            .collect()
    };

    let mut lipschitz: f64 = 0.0;
    let mut growth: f64 = 0.0;
    let mut finite = true;
    for _ in 0..probes.max(1) {
        let t = probe_box.horizon * rng.random::<f64>();
        let x = draw(&mut rng);
        let y = draw(&mut rng);
        let dist = sq_dist(&x, &y);
        if dist == 0.0 {
            continue;
        }
        let ratio = h1_sum(c, set, t, &x, &y)? / dist;
        let g = h2_sum(c, set, t)?;
        finite &= ratio.is_finite() && g.is_finite();
        lipschitz = lipschitz.max(ratio);
        growth = growth.max(g);
    }

    // Shrinking-pair ladder around the origin, the box ends and a few
    // random centres: a Lipschitz field has bounded ratios along it.
    let mut centres = vec![vec![0.0; d], vec![probe_box.lo; d], vec![probe_box.hi; d]];
    centres.extend((0..8).map(|_| draw(&mut rng)));
    let mut warnings = Vec::new();
    for centre in &centres {
        let mut ratios = Vec::new();
        for k in 1..=8 {
            let delta = 10f64.powi(-k);
            let mut y = centre.clone();
            y[0] += delta;
            let r = h1_sum(c, set, 0.0, centre, &y)? / (delta * delta);
            ratios.push(r);
        }
        finite &= ratios.iter().all(|r| r.is_finite());
        let first = ratios[0].max(1e-300);
        let last = *ratios.last().unwrap();
        let growing = ratios.windows(2).all(|w| w[1] >= w[0]);
        if growing && last > 100.0 * first && last > 1.0 {
            warnings.push(format!(
                "non-Lipschitz behaviour near {centre:?}: local ratio grows from {first:e} to {last:e}"
            ));
        }
        lipschitz = lipschitz.max(if growing && last > 100.0 * first { f64::INFINITY } else { ratios.iter().cloned().fold(0.0, f64::max) });
    }

    let lipschitz_ok = finite && lipschitz.is_finite() && warnings.is_empty();
    let report = ValidationReport::new(vec![
        Condition {
            name: "lipschitz".into(),
            passed: lipschitz_ok,
            value: lipschitz,
            note: "empirical C1 with ρ(r) = r".into(),
        },
        Condition {
            name: "linear-growth".into(),
            passed: finite && growth.is_finite(),
            value: growth,
            note: "empirical C2 at x = 0".into(),
        },
    ]);
    Ok(CoefficientReport {
        report,
        lipschitz_constant: lipschitz,
        growth_constant: growth,
        warnings,
    })
}
