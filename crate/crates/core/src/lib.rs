//! Numerical laboratory for one-dimensional Stark operators
//! `H = -d²/dx² - x + q(x)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`potentials`]: perturbations `q`, the random bump-train family, smoothness diagnostics
//! * [`transforms`]: Liouville change of variables and both Prüfer representations
//! * [`integrator`]: adaptive Dormand–Prince integration, trajectories, L² growth,
//!   boundary-condition search
//! * [`wkb`]: mollifier decomposition `q = q₁ + q₂`, WKB phase and residuals,
//!   convergence diagnostics for the Prüfer key integral
//! * [`randomized`]: block increments, Lyapunov exponent estimation, growth
//!   exponents and the dimension report for the random family

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::excessive_precision)]

pub mod error;
pub mod integrator;
pub mod potentials;
pub mod quadrature;
pub mod randomized;
pub mod transforms;
pub mod wkb;

pub use error::{Error, Result};

/// `c = (3/2)^{2/3}`, the constant of the Liouville map `x = c ξ^{2/3}`.
pub const LIOUVILLE_C: f64 = 1.310_370_697_104_448_3;
