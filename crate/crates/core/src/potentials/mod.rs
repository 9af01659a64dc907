//! Perturbation potentials `q(x)`.

mod bump;
mod smoothness;
mod spec;

pub use bump::{BumpFunction, BumpShape, SampledTable, DEFAULT_BUMP_SCALE, STANDARD_INTEGRAL};
pub use smoothness::{holder_quotient, smoothness_report, ProbeGrid, SmoothnessReport, EPS_MIN, EPS_POINTS};
pub use spec::{block_phase, AnalyticPotential, PotentialSpec, RandomBump, PHASE_CACHE_BLOCKS};

/// `q(x)`; see [`PotentialSpec::eval`].
pub fn eval_potential(spec: &PotentialSpec, x: f64) -> crate::Result<f64> {
    spec.eval(x)
}

/// `q(cξ^{2/3})/(cξ^{2/3})` for the random family, computed in ξ.
pub fn eval_random_in_xi(spec: &PotentialSpec, xi: f64) -> crate::Result<f64> {
    spec.eval_random_in_xi(xi)
}
