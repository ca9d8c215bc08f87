//! Quadrature helpers: fixed Gauss-Legendre tensor rules for jump densities and
//! an adaptive one-dimensional integrator for the closed-form constructions.

use gauss_quad::GaussLegendre;
use std::num::NonZeroUsize;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(nodes: usize) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(nodes.max(1)).expect("nonzero");
    GaussLegendre::new(n)
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (x, w))
        .collect()
}

/// Tensor-product Gauss-Legendre rule on the box `[lo, hi]`.
///
/// Returns `(point, weight)` pairs whose weights sum to the box volume.
pub fn tensor_rule(lo: &[f64], hi: &[f64], nodes: usize) -> Vec<(Vec<f64>, f64)> {
    let base = gauss_legendre(nodes);
    let d = lo.len();
    let mut out = vec![(Vec::with_capacity(d), 1.0)];
    for k in 0..d {
        let half = 0.5 * (hi[k] - lo[k]);
        let mid = 0.5 * (hi[k] + lo[k]);
        let mut next = Vec::with_capacity(out.len() * base.len());
        for (pt, w) in &out {
            for &(x, wx) in &base {
                let mut p = pt.clone();
                p.push(mid + half * x);
                next.push((p, w * wx * half));
            }
        }
        out = next;
    }
    out
}

/// Adaptive (double-exponential) quadrature of `f` over the oriented
/// interval from `a` to `b`, to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if b < a {
        return -quadrature::integrate(f, b, a, tol).integral;
    }
    quadrature::integrate(f, a, b, tol).integral
}
