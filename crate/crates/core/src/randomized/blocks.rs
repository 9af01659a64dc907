use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::realization_seed;
use super::theory::{expected_increment, increment_envelope};
use crate::error::{Error, Result};
use crate::integrator::{IntegrationConfig, PruferSolver};
use crate::potentials::{PotentialSpec, RandomBump};
use crate::transforms::PruferState;

/// How the phase entering block `n` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaMode {
    Fixed(f64),
    /// Uniform on `[0, 2π)`, independent per realization.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockOptions {
    pub theta: ThetaMode,
    /// Pair realization `2k+1` with `2k`, shifting `aₙ` by `π`.
    pub antithetic: bool,
}

impl Default for BlockOptions {
    fn default() -> Self {
        BlockOptions { theta: ThetaMode::Random, antithetic: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockIncrement {
    pub n: u64,
    /// `logR((n+1)³) − logR(n³)`.
    pub increment: f64,
    pub theta_start: f64,
    pub realization: u64,
    pub phase: f64,
}

fn theta_for(seed: u64, mode: ThetaMode) -> f64 {
    match mode {
        ThetaMode::Fixed(t) => t,
        ThetaMode::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(u64::MAX);
            TAU * rng.gen::<f64>()
        }
    }
}

/// Integrate block `[n³, (n+1)³]` once per realization, each with its own
/// phase `aₙ` drawn from the realization seed.
#[allow(clippy::too_many_arguments)]
pub fn run_block_ensemble(
    template: &RandomBump,
    energy: f64,
    n: u64,
    realizations: u64,
    master_seed: u64,
    cfg: &IntegrationConfig,
    opts: BlockOptions,
) -> Result<Vec<BlockIncrement>> {
    if n < 1 {
        return Err(Error::InvalidParameter { field: "n", reason: "block index must be >= 1".into() });
    }
    if realizations == 0 || (opts.antithetic && realizations % 2 == 1) {
        return Err(Error::InvalidParameter {
            field: "realizations",
            reason: format!("need a positive (and, if antithetic, even) count, got {realizations}"),
        });
    }
    cfg.validate()?;
    let start = (n as f64).powi(3);
    let end = ((n + 1) as f64).powi(3);
    (0..realizations)
        .into_par_iter()
        .map(|j| {
            let (key, flip) = if opts.antithetic { (j / 2, j % 2 == 1) } else { (j, false) };
            let seed = realization_seed(master_seed, key);
            let mut bump = template.reseeded(seed);
            let mut phase = bump.phase(n);
            if flip {
                phase = (phase + PI).rem_euclid(TAU);
                bump = bump.with_phase(n, phase);
            }
            let theta = theta_for(seed, opts.theta);
            let spec = PotentialSpec::RandomBump(bump);
            let run = || -> Result<f64> {
                let init = PruferState { log_r: 0.0, theta };
                let mut solver = PruferSolver::new(&spec, energy, start, init, cfg)?;
                solver.advance(end, |_, _, _| {})?;
                Ok(solver.state().log_r)
            };
            let increment = run().map_err(|e| e.in_realization(j))?;
            Ok(BlockIncrement { n, increment, theta_start: theta, realization: j, phase })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockStats {
    pub n: u64,
    pub energy: f64,
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    /// Standard error of the mean; over antithetic pair means when paired.
    pub stderr: f64,
    /// `(9π/8n)|f̂(3E/c)|²`.
    pub expected: f64,
    /// `mean / expected`.
    pub kappa: f64,
    pub max_abs: f64,
    pub envelope: f64,
}

pub fn block_statistics(
    increments: &[BlockIncrement],
    template: &RandomBump,
    energy: f64,
    antithetic: bool,
) -> Result<BlockStats> {
    let Some(first) = increments.first() else {
        return Err(Error::InvalidParameter { field: "increments", reason: "empty ensemble".into() });
    };
    let n = first.n;
    let values: Vec<f64> = increments.iter().map(|b| b.increment).collect();
    let count = values.len();
    let mean = values.iter().sum::<f64>() / count as f64;
    let variance =
        if count > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64 } else { 0.0 };
    let units: Vec<f64> = if antithetic {
        values.chunks(2).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect()
    } else {
        values.clone()
    };
    let k = units.len() as f64;
    let unit_mean = units.iter().sum::<f64>() / k;
    let unit_var =
        if units.len() > 1 { units.iter().map(|v| (v - unit_mean).powi(2)).sum::<f64>() / (k - 1.0) } else { 0.0 };
    let expected = expected_increment(template.bump(), energy, n) * template.coupling().powi(2);
    let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(BlockStats {
        n,
        energy,
        count,
        mean,
        variance,
        stderr: (unit_var / k).sqrt(),
        expected,
        kappa: if expected > 0.0 { mean / expected } else { f64::NAN },
        max_abs,
        envelope: increment_envelope(template.bump(), template.coupling(), energy, n),
    })
}
