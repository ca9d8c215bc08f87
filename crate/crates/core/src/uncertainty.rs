//! The uncertainty set `U = {(ν, 0, Q)}` and the nonlinear functionals built
//! from it.
//!
//! `U` is a product of a finite family of jump measures `𝒱` and a finite
//! family of volatility matrices `𝒬`; the drift slot is identically zero.
//! Every supremum over `U` is therefore a finite maximum.

use crate::error::{Error, Result};
use crate::quadrature::tensor_rule;
use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Default number of Gauss-Legendre nodes per dimension for densities.
pub const DEFAULT_DENSITY_NODES: usize = 64;

/// Default exponent for the small-jump moment condition.
pub const DEFAULT_Q: f64 = 0.5;

pub type DensityFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub point: Vec<f64>,
    pub weight: f64,
}

/// A jump density with bounded support `[lo, hi]`, vanishing on the ball
/// `|u| < exclusion_radius`.
#[derive(Clone)]
pub struct DensitySpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub density: DensityFn,
    pub exclusion_radius: f64,
    /// Overrides the quadrature mass; `f64::INFINITY` marks a measure that
    /// is known to have infinite activity.
    pub declared_mass: Option<f64>,
    /// Upper bound on the density, used for rejection sampling.
    pub density_bound: f64,
    pub nodes: usize,
}

impl DensitySpec {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, density: DensityFn, density_bound: f64) -> Self {
        Self {
            lo,
            hi,
            density,
            exclusion_radius: 0.0,
            declared_mass: None,
            density_bound,
            nodes: DEFAULT_DENSITY_NODES,
        }
    }

    fn eval(&self, u: &[f64]) -> f64 {
        if norm(u) < self.exclusion_radius || norm(u) == 0.0 {
            0.0
        } else {
            (self.density)(u)
        }
    }
}

#[derive(Clone)]
pub enum MarkLaw {
    Atomic(Vec<Atom>),
    Density(DensitySpec),
}

/// A finite jump measure `ν` on `ℝ^d \ {0}`.
#[derive(Clone)]
pub struct JumpMeasure {
    dim: usize,
    law: MarkLaw,
    total_mass: f64,
    // Atoms for atomic measures, quadrature nodes (density-weighted) otherwise.
    nodes: Vec<(Vec<f64>, f64)>,
    cumulative: Vec<f64>,
}

impl fmt::Debug for JumpMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.law {
            MarkLaw::Atomic(atoms) => f
                .debug_struct("JumpMeasure")
                .field("dim", &self.dim)
                .field("atoms", atoms)
                .finish(),
            MarkLaw::Density(spec) => f
                .debug_struct("JumpMeasure")
                .field("dim", &self.dim)
                .field("support", &(&spec.lo, &spec.hi))
                .field("total_mass", &self.total_mass)
                .finish(),
        }
    }
}

pub(crate) fn norm(u: &[f64]) -> f64 {
    u.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl JumpMeasure {
    /// The zero measure (no jumps).
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            law: MarkLaw::Atomic(Vec::new()),
            total_mass: 0.0,
            nodes: Vec::new(),
            cumulative: Vec::new(),
        }
    }

    /// `mass · δ_point`.
    pub fn dirac(point: Vec<f64>, mass: f64) -> Result<Self> {
        let dim = point.len();
        Self::atomic(dim, vec![(point, mass)])
    }

    pub fn atomic(dim: usize, atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let mut out = Vec::with_capacity(atoms.len());
        for (point, weight) in atoms {
            if point.len() != dim {
                return Err(Error::Dimension(format!(
                    "atom {:?} has dimension {}, expected {}",
                    point,
                    point.len(),
                    dim
                )));
            }
            if !(weight.is_finite() && weight > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "atom weight must be finite and positive, got {weight}"
                )));
            }
            if point.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("atom {point:?}")));
            }
            if point.iter().all(|&v| v == 0.0) {
                return Err(Error::InvalidInput(
                    "jump measures carry no mass at the origin".into(),
                ));
            }
            out.push(Atom { point, weight });
        }
        let nodes: Vec<_> = out.iter().map(|a| (a.point.clone(), a.weight)).collect();
        let total_mass = out.iter().map(|a| a.weight).sum();
        let cumulative = prefix(&nodes);
        Ok(Self {
            dim,
            law: MarkLaw::Atomic(out),
            total_mass,
            nodes,
            cumulative,
        })
    }

    pub fn density(spec: DensitySpec) -> Result<Self> {
        let dim = spec.lo.len();
        if spec.hi.len() != dim {
            return Err(Error::Dimension("density support bounds disagree".into()));
        }
        if spec.lo.iter().zip(&spec.hi).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidInput("density support must be a nonempty box".into()));
        }
        if spec.nodes == 0 {
            return Err(Error::InvalidInput("quadrature needs at least one node".into()));
        }
        let mut nodes = Vec::new();
        for (p, w) in tensor_rule(&spec.lo, &spec.hi, spec.nodes) {
            let dens = spec.eval(&p);
            if !dens.is_finite() || dens < 0.0 {
                return Err(Error::NonFinite(format!("density at {p:?}")));
            }
            if dens > 0.0 {
                nodes.push((p, w * dens));
            }
        }
        let quad_mass: f64 = nodes.iter().map(|(_, w)| w).sum();
        let total_mass = spec.declared_mass.unwrap_or(quad_mass);
        let cumulative = prefix(&nodes);
        Ok(Self {
            dim,
            law: MarkLaw::Density(spec),
            total_mass,
            nodes,
            cumulative,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn law(&self) -> &MarkLaw {
        &self.law
    }

    /// `λ = ν(ℝ^d \ {0})`.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn is_zero(&self) -> bool {
        self.total_mass == 0.0
    }

    /// Atoms for atomic measures; density-weighted quadrature nodes otherwise.
    pub fn nodes(&self) -> &[(Vec<f64>, f64)] {
        &self.nodes
    }

    /// `∫ φ dν`: exact for atoms, fixed-node quadrature for densities.
    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, phi: F) -> Result<f64> {
        let mut acc = 0.0;
        for (p, w) in &self.nodes {
            let v = phi(p);
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("integrand at jump mark {p:?}")));
            }
            acc += w * v;
        }
        Ok(acc)
    }

    /// `∫ |u| ν(du)`.
    pub fn first_moment(&self) -> f64 {
        self.nodes.iter().map(|(p, w)| w * norm(p)).sum()
    }

    /// `∫_{0<|u|<1} |u|^q ν(du)`.
    pub fn small_jump_moment(&self, q: f64) -> f64 {
        self.nodes
            .iter()
            .filter(|(p, _)| norm(p) < 1.0)
            .map(|(p, w)| w * norm(p).powf(q))
            .sum()
    }

    /// Draw one mark from `ν / λ`.
    pub fn sample_mark<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        match &self.law {
            MarkLaw::Atomic(atoms) => {
                let total = *self.cumulative.last().unwrap_or(&0.0);
                let target = rng.random::<f64>() * total;
                let idx = self
                    .cumulative
                    .partition_point(|&c| c <= target)
                    .min(atoms.len() - 1);
                atoms[idx].point.clone()
            }
            MarkLaw::Density(spec) => {
                let mut u = vec![0.0; self.dim];
                loop {
                    for (k, slot) in u.iter_mut().enumerate() {
                        *slot = spec.lo[k] + (spec.hi[k] - spec.lo[k]) * rng.random::<f64>();
                    }
                    let accept = rng.random::<f64>() * spec.density_bound;
                    if accept < spec.eval(&u) {
                        return u;
                    }
                }
            }
        }
    }

    fn same_as(&self, other: &JumpMeasure) -> bool {
        match (&self.law, &other.law) {
            (MarkLaw::Atomic(a), MarkLaw::Atomic(b)) => a == b,
            (MarkLaw::Density(a), MarkLaw::Density(b)) => {
                Arc::ptr_eq(&a.density, &b.density) && a.lo == b.lo && a.hi == b.hi
            }
            _ => false,
        }
    }
}

fn prefix(nodes: &[(Vec<f64>, f64)]) -> Vec<f64> {
    nodes
        .iter()
        .scan(0.0, |acc, (_, w)| {
            *acc += w;
            Some(*acc)
        })
        .collect()
}

/// Atomic base measure `μ` with per-`ν` maps `g_ν` such that `ν = μ ∘ g_ν^{-1}`.
///
/// `maps[k][a]` is the index of the `ν_k` atom that the `a`-th `μ` atom is
/// sent to, or `None` when it is sent to the origin (no jump).
#[derive(Debug, Clone)]
pub struct BaseMeasureTransport {
    pub base: JumpMeasure,
    pub maps: Vec<Vec<Option<usize>>>,
}

impl BaseMeasureTransport {
    pub fn new(base: JumpMeasure, maps: Vec<Vec<Option<usize>>>) -> Result<Self> {
        let n = base.nodes().len();
        if !matches!(base.law(), MarkLaw::Atomic(_)) {
            return Err(Error::InvalidInput("transport base must be atomic".into()));
        }
        if maps.iter().any(|m| m.len() != n) {
            return Err(Error::Dimension(
                "every map must assign each base atom".into(),
            ));
        }
        Ok(Self { base, maps })
    }

    /// Largest `|ν_k(atom) − μ(g_k^{-1}(atom))|` over the atoms of `ν_k`.
    pub fn pushforward_defect(&self, k: usize, nu: &JumpMeasure) -> Result<f64> {
        let MarkLaw::Atomic(atoms) = nu.law() else {
            return Err(Error::InvalidInput("transport is defined for atomic ν only".into()));
        };
        let map = self
            .maps
            .get(k)
            .ok_or_else(|| Error::InvalidInput(format!("no map for ν index {k}")))?;
        let mut pushed = vec![0.0; atoms.len()];
        for (a, target) in map.iter().enumerate() {
            if let Some(j) = *target {
                let slot = pushed.get_mut(j).ok_or_else(|| {
                    Error::InvalidInput(format!("map sends base atom {a} to missing atom {j}"))
                })?;
                *slot += self.base.nodes()[a].1;
            }
        }
        Ok(atoms
            .iter()
            .zip(&pushed)
            .map(|(atom, p)| (atom.weight - p).abs())
            .fold(0.0, f64::max))
    }

    /// Checks `ν_k = μ ∘ g_k^{-1}` on atoms for every member of the jump family.
    pub fn verify(&self, set: &UncertaintySet) -> Result<bool> {
        if self.maps.len() != set.jump_family().len() {
            return Err(Error::Dimension("one map per jump measure is required".into()));
        }
        for (k, nu) in set.jump_family().iter().enumerate() {
            if self.pushforward_defect(k, nu)? > 1e-12 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Finite uncertainty set `𝒱 × {0} × 𝒬`.
#[derive(Debug, Clone)]
pub struct UncertaintySet {
    dim: usize,
    jumps: Vec<JumpMeasure>,
    vols: Vec<DMatrix<f64>>,
    elliptic: bool,
    ellipticity_floor: f64,
    transport: Option<BaseMeasureTransport>,
    // QQ* for each Q, row-major.
    covariances: Vec<Vec<f64>>,
    // Q for each Q, row-major.
    vols_flat: Vec<Vec<f64>>,
}

impl UncertaintySet {
    pub fn new(dim: usize, jumps: Vec<JumpMeasure>, vols: Vec<DMatrix<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension("dimension must be positive".into()));
        }
        if jumps.is_empty() || vols.is_empty() {
            return Err(Error::InvalidInput(
                "jump and volatility families must be nonempty".into(),
            ));
        }
        for (k, nu) in jumps.iter().enumerate() {
            if nu.dim() != dim {
                return Err(Error::Dimension(format!(
                    "jump measure {k} has dimension {}, expected {dim}",
                    nu.dim()
                )));
            }
        }
        for (m, q) in vols.iter().enumerate() {
            if q.nrows() != dim || q.ncols() != dim {
                return Err(Error::Dimension(format!(
                    "volatility matrix {m} is {}x{}, expected {dim}x{dim}",
                    q.nrows(),
                    q.ncols()
                )));
            }
            if q.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("volatility matrix {m}")));
            }
        }
        let covariances = vols.iter().map(|q| row_major(&(q * q.transpose()))).collect();
        let vols_flat = vols.iter().map(row_major).collect();
        Ok(Self {
            dim,
            jumps,
            vols,
            elliptic: false,
            ellipticity_floor: 0.0,
            transport: None,
            covariances,
            vols_flat,
        })
    }

    /// One-dimensional set with scalar volatilities.
    pub fn scalar(jumps: Vec<JumpMeasure>, vols: &[f64]) -> Result<Self> {
        let vols = vols.iter().map(|&q| DMatrix::from_element(1, 1, q)).collect();
        Self::new(1, jumps, vols)
    }

    /// Flags the set as elliptic with floor `ι` on the eigenvalues of `QQ*`.
    pub fn with_ellipticity(mut self, floor: f64) -> Self {
        self.elliptic = true;
        self.ellipticity_floor = floor;
        self
    }

    pub fn with_transport(mut self, transport: BaseMeasureTransport) -> Self {
        self.transport = Some(transport);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn jump_family(&self) -> &[JumpMeasure] {
        &self.jumps
    }

    pub fn vol_family(&self) -> &[DMatrix<f64>] {
        &self.vols
    }

    pub fn is_elliptic(&self) -> bool {
        self.elliptic
    }

    pub fn ellipticity_floor(&self) -> f64 {
        self.ellipticity_floor
    }

    pub fn transport(&self) -> Option<&BaseMeasureTransport> {
        self.transport.as_ref()
    }

    /// `QQ*` for the `m`-th volatility matrix, row-major.
    pub fn covariance(&self, m: usize) -> &[f64] {
        &self.covariances[m]
    }

    /// The `m`-th volatility matrix, row-major.
    pub fn vol(&self, m: usize) -> &[f64] {
        &self.vols_flat[m]
    }

    pub fn max_jump_mass(&self) -> f64 {
        self.jumps.iter().map(|n| n.total_mass()).fold(0.0, f64::max)
    }

    /// `max_Q tr(QQ*)`.
    pub fn max_trace(&self) -> f64 {
        self.covariances
            .iter()
            .map(|c| (0..self.dim).map(|i| c[i * self.dim + i]).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of `QQ*` over the volatility family.
    pub fn min_covariance_eigenvalue(&self) -> f64 {
        self.vols
            .iter()
            .map(|q| {
                let c = q * q.transpose();
                c.symmetric_eigenvalues().min()
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn family_len(&self) -> (usize, usize) {
        (self.jumps.len(), self.vols.len())
    }

    pub(crate) fn same_jump(&self, k: usize, other: &UncertaintySet, l: usize) -> bool {
        self.jumps[k].same_as(&other.jumps[l])
    }

    pub(crate) fn same_vol(&self, m: usize, other: &UncertaintySet, n: usize) -> bool {
        self.vols[m] == other.vols[n]
    }
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub conditions: Vec<Condition>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn new(conditions: Vec<Condition>) -> Self {
        let passed = conditions.iter().all(|c| c.passed);
        Self { conditions, passed }
    }

    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

/// Checks the boundedness display, the small-jump moment, finite activity and
/// (when flagged) the ellipticity floor.
pub fn validate_uncertainty_set(set: &UncertaintySet, q: f64) -> Result<ValidationReport> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidInput(format!("q must lie in (0, 1), got {q}")));
    }
    let first = set
        .jumps
        .iter()
        .map(|n| n.first_moment())
        .fold(0.0, f64::max);
    let half_trace = 0.5 * set.max_trace();
    let bound = first + half_trace;
    let moment = set
        .jumps
        .iter()
        .map(|n| n.small_jump_moment(q))
        .fold(0.0, f64::max);
    let mass = set.max_jump_mass();
    let min_eig = set.min_covariance_eigenvalue();

    let mut conditions = vec![
        Condition {
            name: "boundedness".into(),
            passed: bound.is_finite(),
            value: bound,
            note: format!("sup ∫|u|dν + |ζ| + ½tr(QQ*) = {first} + 0 + {half_trace}"),
        },
        Condition {
            name: "small-jump-moment".into(),
            passed: moment.is_finite(),
            value: moment,
            note: format!("sup ∫_{{0<|u|<1}} |u|^{q} dν"),
        },
        Condition {
            name: "finite-activity".into(),
            passed: mass.is_finite(),
            value: mass,
            note: "sup ν(ℝ^d \\ {0})".into(),
        },
    ];
    conditions.push(if set.elliptic {
        Condition {
            name: "ellipticity".into(),
            passed: set.ellipticity_floor > 0.0 && min_eig >= set.ellipticity_floor,
            value: min_eig,
            note: format!("min eigenvalue of QQ* against floor {}", set.ellipticity_floor),
        }
    } else {
        Condition {
            name: "ellipticity".into(),
            passed: true,
            value: min_eig,
            note: "not required (set not flagged elliptic)".into(),
        }
    });
    Ok(ValidationReport::new(conditions))
}

fn check_symmetric(a: &DMatrix<f64>, dim: usize) -> Result<()> {
    if a.nrows() != dim || a.ncols() != dim {
        return Err(Error::Dimension(format!(
            "matrix is {}x{}, expected {dim}x{dim}",
            a.nrows(),
            a.ncols()
        )));
    }
    let scale = a.amax().max(1.0);
    let asym = (a - a.transpose()).amax();
    if asym > 1e-12 * scale {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    Ok(())
}

/// `½ tr(C A)` for row-major `C` and `A`.
fn half_trace_product(c: &[f64], a: &[f64], dim: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            acc += c[i * dim + j] * a[j * dim + i];
        }
    }
    0.5 * acc
}

/// `G(A) = ½ max_{Q∈𝒬} tr(QQ* A)` on a row-major symmetric matrix, without
/// input checks. Returns the value and the maximising `Q` index.
pub fn g_of_flat(a: &[f64], set: &UncertaintySet) -> (f64, usize) {
    let mut best = (f64::NEG_INFINITY, 0);
    for (m, c) in set.covariances.iter().enumerate() {
        let v = half_trace_product(c, a, set.dim);
        if v > best.0 {
            best = (v, m);
        }
    }
    best
}

/// `G(A) = ½ max_{Q∈𝒬} tr(QQ* A)` with the maximising index.
pub fn g_of(a: &DMatrix<f64>, set: &UncertaintySet) -> Result<(f64, usize)> {
    check_symmetric(a, set.dim)?;
    Ok(g_of_flat(&row_major(a), set))
}

/// Inverse of `a ↦ G(a)` in one dimension; requires an elliptic set.
pub fn g_inverse_1d(y: f64, set: &UncertaintySet) -> Result<f64> {
    if set.dim != 1 {
        return Err(Error::Dimension("G inverse is defined for d = 1 only".into()));
    }
    if !set.elliptic || set.min_covariance_eigenvalue() <= 0.0 {
        return Err(Error::NotElliptic(
            "G is invertible only when 𝒬 is bounded away from 0".into(),
        ));
    }
    let q2: Vec<f64> = set.covariances.iter().map(|c| c[0]).collect();
    Ok(if y >= 0.0 {
        2.0 * y / q2.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    } else {
        2.0 * y / q2.iter().cloned().fold(f64::INFINITY, f64::min)
    })
}

/// `max_{ν∈𝒱} ∫ φ dν` with the maximising index; ties go to the lowest index.
pub fn sup_jump_integral<F: Fn(&[f64]) -> f64>(phi: F, set: &UncertaintySet) -> Result<(f64, usize)> {
    let mut best = (f64::NEG_INFINITY, 0);
    for (k, nu) in set.jumps.iter().enumerate() {
        let v = nu.integrate(&phi)?;
        if v > best.0 {
            best = (v, k);
        }
    }
    Ok(best)
}

/// Central-difference Hessian of `g` at the origin.
pub fn hessian_at_origin<F: Fn(&[f64]) -> f64>(g: F, dim: usize, step: f64) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(dim, dim);
    let mut x = vec![0.0; dim];
    let g0 = g(&x);
    for i in 0..dim {
        x[i] = step;
        let gp = g(&x);
        x[i] = -step;
        let gm = g(&x);
        x[i] = 0.0;
        h[(i, i)] = (gp - 2.0 * g0 + gm) / (step * step);
        for j in (i + 1)..dim {
            let mut e = |si: f64, sj: f64| {
                x[i] = si * step;
                x[j] = sj * step;
                let v = g(&x);
                x[i] = 0.0;
                x[j] = 0.0;
                v
            };
            let v = (e(1.0, 1.0) - e(1.0, -1.0) - e(-1.0, 1.0) + e(-1.0, -1.0)) / (4.0 * step * step);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    h
}

/// Lévy-Khintchine functional
/// `G_X[g] = max_{(ν,Q)} { ∫ g dν + ½ tr(∂²g(0) QQ*) }`.
///
/// When `hessian` is `None` it is taken by central differences with step
/// `1e-5`. Returns the value and the maximising `(ν, Q)` indices.
pub fn g_x_functional<F: Fn(&[f64]) -> f64>(
    g: F,
    hessian: Option<&DMatrix<f64>>,
    set: &UncertaintySet,
) -> Result<(f64, (usize, usize))> {
    let origin = vec![0.0; set.dim];
    let g0 = g(&origin);
    if !g0.is_finite() || g0.abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("g(0) must vanish, got {g0}")));
    }
    let h = match hessian {
        Some(h) => {
            check_symmetric(h, set.dim)?;
            h.clone()
        }
        None => hessian_at_origin(&g, set.dim, 1e-5),
    };
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("Hessian of g at 0".into()));
    }
    let h_flat = row_major(&h);
    let mut best = (f64::NEG_INFINITY, (0, 0));
    for (k, nu) in set.jumps.iter().enumerate() {
        let jump = nu.integrate(&g)?;
        for (m, c) in set.covariances.iter().enumerate() {
            let v = jump + half_trace_product(c, &h_flat, set.dim);
            if v > best.0 {
                best = (v, (k, m));
            }
        }
    }
    Ok(best)
}
