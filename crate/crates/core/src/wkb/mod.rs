//! WKB asymptotics: the `q = q₁ + q₂` split, the WKB solution built from it,
//! the two-window residual against numerics, and partial key integrals.

mod decompose;
mod keyint;
mod residual;
mod solution;

pub use decompose::{decompose, mollify_decompose, Decomposition, Provenance, ZetaEstimate, MOLLIFIER_NODES};
pub use keyint::{keyint_partial, KeyintPartials};
pub use residual::{wkb_residual, ResidualReport};
pub use solution::{wkb_eval, wkb_phase, WkbSolution};
