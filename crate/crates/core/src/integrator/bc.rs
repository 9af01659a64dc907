use std::f64::consts::PI;

use serde::Serialize;

use super::prufer::{PairSample, PairSolver};
use super::IntegrationConfig;
use crate::error::{Error, Result};
use crate::potentials::PotentialSpec;
use crate::transforms::PruferState;

/// Coarse scan resolution over `[0, π)`.
pub const SCAN_POINTS: usize = 64;
/// Golden-section tolerance in radians.
pub const BC_TOLERANCE: f64 = 1e-4;
/// Objectives whose scan spread falls below this are reported as flat.
pub const FLAT_SPREAD: f64 = 0.1;
const PROFILE_POINTS: usize = 200;

/// State of the solution with `θ(ξ₀) = β`, `logR(ξ₀) = 0`, formed from the
/// two basis solutions. The phase is returned reduced to `(−π, π]`.
pub fn basis_superposition(sample: &PairSample, beta: f64) -> PruferState {
    let [a, b] = sample.states;
    let m = a.log_r.max(b.log_r);
    let (sb, cb) = beta.sin_cos();
    let ra = sb * (a.log_r - m).exp();
    let rb = cb * (b.log_r - m).exp();
    let (sa, ca) = a.theta.sin_cos();
    let (s2, c2) = b.theta.sin_cos();
    let phi = ra * sa + rb * s2;
    let dphi = ra * ca + rb * c2;
    PruferState { log_r: m + phi.hypot(dphi).ln(), theta: phi.atan2(dphi) }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimalGrowth {
    pub beta: f64,
    pub log_r_end: f64,
    /// `(β, logR(ξ_max; β))` on the coarse scan.
    pub scan: Vec<(f64, f64)>,
    pub spread: f64,
    /// `(ξ, logR(ξ; β*))` on a logarithmic grid.
    pub profile: Vec<(f64, f64)>,
}

/// `(β*, logR at β*, coarse scan, objective spread)`.
pub(crate) type EndMinimum = (f64, f64, Vec<(f64, f64)>, f64);

/// Minimise `β ↦ logR(ξ_end; β)` over `[0, π)`.
pub(crate) fn minimise_end(end: &PairSample) -> Result<EndMinimum> {
    let objective = |beta: f64| basis_superposition(end, beta).log_r;
    let scan: Vec<(f64, f64)> = (0..SCAN_POINTS)
        .map(|k| {
            let b = PI * k as f64 / SCAN_POINTS as f64;
            (b, objective(b))
        })
        .collect();
    let (lo, hi) = scan.iter().fold((f64::MAX, f64::MIN), |(lo, hi), &(_, v)| (lo.min(v), hi.max(v)));
    let spread = hi - lo;
    if !(spread >= FLAT_SPREAD) {
        return Err(Error::NoDistinguishedDirection { spread });
    }
    let k = scan.iter().enumerate().min_by(|a, b| a.1 .1.total_cmp(&b.1 .1)).map(|(k, _)| k).unwrap_or(0);
    let step = PI / SCAN_POINTS as f64;
    let centre = scan[k].0;
    let (mut a, mut b) = (centre - step, centre + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (objective(c), objective(d));
    while b - a > BC_TOLERANCE {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = objective(d);
        }
    }
    let beta = (0.5 * (a + b)).rem_euclid(PI);
    Ok((beta, objective(beta), scan, spread))
}

pub fn find_minimal_growth_bc(
    spec: &PotentialSpec,
    energy: f64,
    xi_max: f64,
    cfg: &IntegrationConfig,
) -> Result<MinimalGrowth> {
    if !(xi_max >= 1e3) {
        return Err(Error::InvalidParameter {
            field: "xi_max",
            reason: format!("boundary-condition search needs xi_max >= 1e3, got {xi_max}"),
        });
    }
    let mut solver = PairSolver::new(spec, energy, 1.0, cfg)?;
    let mut samples = vec![solver.sample()];
    for i in 1..PROFILE_POINTS {
        let target = xi_max.powf(i as f64 / (PROFILE_POINTS - 1) as f64);
        let target = if i == PROFILE_POINTS - 1 { xi_max } else { target };
        solver.advance(target, |_| {})?;
        samples.push(solver.sample());
    }
    let end = samples[samples.len() - 1];
    let (beta, log_r_end, scan, spread) = minimise_end(&end)?;
    let profile = samples.iter().map(|s| (s.xi, basis_superposition(s, beta).log_r)).collect();
    Ok(MinimalGrowth { beta, log_r_end, scan, spread, profile })
}
