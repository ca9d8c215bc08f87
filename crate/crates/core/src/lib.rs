//! Simulation and verification toolkit for stochastic differential equations
//! driven by G-Lévy processes.
//!
//! The crate is organised around the objects of the model:
//!
//! - [`uncertainty`]: the uncertainty set `U = {(ν, 0, Q)}` and the nonlinear
//!   functionals derived from it (`G`, `G_X`, worst-case jump integrals).
//! - [`scenario`]: piecewise-constant and state-feedback controls over which
//!   sublinear expectations are maximised.
//! - [`paths`]: driver simulation (G-Brownian part, quadratic covariation,
//!   jumps) and the Euler scheme for the SDE.
//! - [`expectation`]: scenario-sup Monte Carlo estimators for `Ē` and `C̄`.
//! - [`functional`]: the additive functional `F_{s,t}` and path-independence
//!   residuals.
//! - [`pide`]: the characterising PIDE system, manufactured solutions, the
//!   closed-form one-dimensional cases, the monotone viscosity solver and the
//!   decomposition-identification check.

pub mod error;
pub mod expectation;
pub mod functional;
pub mod paths;
pub mod pide;
pub mod presets;
pub mod quadrature;
pub mod rng;
pub mod scenario;
pub mod uncertainty;

pub use error::{Error, Result};
pub use rng::SeedTriple;
