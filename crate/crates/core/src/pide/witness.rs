use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// `(t, x) -> V(t, x)`.
pub type ValueFn = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;
/// `(t, x, out)`.
pub type VectorFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;

/// Default finite-difference step in `t`.
pub const TIME_STEP: f64 = 1e-5;
/// Default finite-difference step in `x`.
pub const SPACE_STEP: f64 = 1e-4;

/// Rectangle `[0, t_max] × Π [lo_k, hi_k]` on which a witness is checked.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub t_max: f64,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Domain {
    pub fn new(t_max: f64, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::Dimension("domain bounds must have equal, positive length".into()));
        }
        if !(t_max > 0.0) || lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidInput("domain must be a non-degenerate box".into()));
        }
        Ok(Self { t_max, lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Tensor grid with `per_axis` points on each space axis and `times`
    /// points in `[0, t_max]`, capped at roughly `cap` points overall.
    pub fn probe_grid(&self, times: usize, per_axis: usize, cap: usize) -> Vec<(f64, Vec<f64>)> {
        let d = self.dim();
        let mut per = per_axis.max(2);
        while per > 2 && times.saturating_mul(per.saturating_pow(d as u32)) > cap {
            per -= 1;
        }
        let times = times.max(2);
        let mut out = Vec::new();
        let total = per.pow(d as u32);
        for ti in 0..times {
            let t = self.t_max * ti as f64 / (times - 1) as f64;
            for mut idx in 0..total {
                let mut x = Vec::with_capacity(d);
                for k in 0..d {
                    let j = idx % per;
                    idx /= per;
                    x.push(self.lo[k] + (self.hi[k] - self.lo[k]) * j as f64 / (per - 1) as f64);
                }
                out.push((t, x));
            }
        }
        out
    }
}

/// A candidate `V(t, x)` with optional analytic derivatives; missing ones
/// come from central stencils.
#[derive(Clone)]
pub struct PideWitness {
    dim: usize,
    value: ValueFn,
    time_derivative: Option<ValueFn>,
    gradient: Option<VectorFn>,
    hessian: Option<VectorFn>,
    time_step: f64,
    space_step: f64,
}

impl fmt::Debug for PideWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PideWitness")
            .field("dim", &self.dim)
            .field("time_derivative", &self.time_derivative.is_some())
            .field("gradient", &self.gradient.is_some())
            .field("hessian", &self.hessian.is_some())
            .field("time_step", &self.time_step)
            .field("space_step", &self.space_step)
            .finish()
    }
}

impl PideWitness {
    pub fn new(dim: usize, value: ValueFn) -> Self {
        Self {
            dim,
            value,
            time_derivative: None,
            gradient: None,
            hessian: None,
            time_step: TIME_STEP,
            space_step: SPACE_STEP,
        }
    }

    pub fn with_time_derivative(mut self, f: ValueFn) -> Self {
        self.time_derivative = Some(f);
        self
    }

    pub fn with_gradient(mut self, f: VectorFn) -> Self {
        self.gradient = Some(f);
        self
    }

    pub fn with_hessian(mut self, f: VectorFn) -> Self {
        self.hessian = Some(f);
        self
    }

    pub fn with_steps(mut self, time_step: f64, space_step: f64) -> Self {
        self.time_step = time_step;
        self.space_step = space_step;
        self
    }

    /// Stencil steps scaled to the domain: `1e-5·T` in time and `1e-4` times
    /// the widest side in space.
    pub fn scaled_to(self, domain: &Domain) -> Self {
        let width = domain
            .lo
            .iter()
            .zip(&domain.hi)
            .map(|(a, b)| b - a)
            .fold(0.0, f64::max);
        self.with_steps(TIME_STEP * domain.t_max, SPACE_STEP * width)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, t: f64, x: &[f64]) -> f64 {
        (self.value)(t, x)
    }

    pub fn time_derivative(&self, t: f64, x: &[f64]) -> f64 {
        match &self.time_derivative {
            Some(f) => f(t, x),
            None => {
                let h = self.time_step;
                ((self.value)(t + h, x) - (self.value)(t - h, x)) / (2.0 * h)
            }
        }
    }

    pub fn gradient(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        match &self.gradient {
            Some(f) => f(t, x, &mut out),
            None => {
                let h = self.space_step;
                let mut p = x.to_vec();
                for k in 0..self.dim {
                    p[k] = x[k] + h;
                    let up = (self.value)(t, &p);
                    p[k] = x[k] - h;
                    let down = (self.value)(t, &p);
                    p[k] = x[k];
                    out[k] = (up - down) / (2.0 * h);
                }
            }
        }
        out
    }

    /// Row-major `d × d`.
    pub fn hessian(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut out = vec![0.0; d * d];
        match &self.hessian {
            Some(f) => f(t, x, &mut out),
            None => {
                let h = self.space_step;
                let v = |p: &[f64]| (self.value)(t, p);
                let centre = v(x);
                let mut p = x.to_vec();
                for i in 0..d {
                    p[i] = x[i] + h;
                    let up = v(&p);
                    p[i] = x[i] - h;
                    let down = v(&p);
                    p[i] = x[i];
                    out[i * d + i] = (up - 2.0 * centre + down) / (h * h);
                    for j in i + 1..d {
                        let mut corner = |si: f64, sj: f64| {
                            p[i] = x[i] + si * h;
                            p[j] = x[j] + sj * h;
                            let r = v(&p);
                            p[i] = x[i];
                            p[j] = x[j];
                            r
                        };
                        let m = (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0) + corner(-1.0, -1.0))
                            / (4.0 * h * h);
                        out[i * d + j] = m;
                        out[j * d + i] = m;
                    }
                }
            }
        }
        out
    }

    /// Fails if `|∇V|` drops below `floor` anywhere on `probes`.
    pub fn check_gradient_floor(&self, probes: &[(f64, Vec<f64>)], floor: f64) -> Result<()> {
        for (t, x) in probes {
            let g = self.gradient(*t, x);
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(norm >= floor) {
                return Err(Error::GradientFloor {
                    t: *t,
                    x: x.clone(),
                    value: norm,
                    floor,
                });
            }
        }
        Ok(())
    }
}
