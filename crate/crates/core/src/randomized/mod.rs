//! Random bump-train experiments: block increments of `log R`, the power-law
//! Lyapunov exponent, growth exponents and the dimension formula.

mod blocks;
mod ensemble;
mod theory;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use blocks::{block_statistics, run_block_ensemble, BlockIncrement, BlockOptions, BlockStats, ThetaMode};
pub use ensemble::{
    estimate_lyapunov, growth_exponents, run_ensemble, EnergySummary, EnsembleConfig, EnsembleRun, GrowthPair,
    LogRCurves, LyapunovEstimate, ReadingMatch, RealizationRecord, BOOTSTRAP_RESAMPLES, MIN_FIT_BLOCKS,
};
pub use theory::{
    dimension_report, expected_increment, increment_envelope, lyapunov_theoretical, lyapunov_with_reading,
    DimensionReport, Reading, KAPPA,
};

/// Seed of realization `j` under master seed `master`.
pub fn realization_seed(master: u64, j: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(j);
    rng.gen()
}
