use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::realization_seed;
use super::theory::{from_lambda, lyapunov_with_reading, Reading, KAPPA};
use crate::error::{Error, Result};
use crate::integrator::bc::minimise_end;
use crate::integrator::trajectory::{fit_growth, line_fit};
use crate::integrator::{basis_superposition, GrowthFit, IntegrationConfig, PairSample, PairSolver};
use crate::potentials::{PotentialSpec, RandomBump};
use crate::transforms::{x_of_xi_unchecked, xi_of_x};

pub const BOOTSTRAP_RESAMPLES: usize = 500;
/// Fewest blocks accepted by [`estimate_lyapunov`].
pub const MIN_FIT_BLOCKS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleConfig {
    pub realizations: u64,
    pub n_min: u64,
    pub n_max: u64,
    pub energies: Vec<f64>,
    pub seed: u64,
    /// Initial angle of the "generic" solution.
    pub generic_beta: f64,
    /// Points of the logarithmic L grid for growth fits.
    pub l_points: usize,
    pub integration: IntegrationConfig,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            realizations: 200,
            n_min: 10,
            n_max: 60,
            energies: vec![0.0],
            seed: 0,
            generic_beta: 0.5,
            l_points: 60,
            integration: IntegrationConfig::default(),
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &'static str, reason: String| Err(Error::InvalidParameter { field, reason });
        if self.realizations < 1 {
            return bad("realizations", "must be at least 1".into());
        }
        if self.n_min < 2 {
            return bad("n_min", format!("must be at least 2, got {}", self.n_min));
        }
        if self.n_max <= self.n_min {
            return bad("n_max", format!("must exceed n_min = {}, got {}", self.n_min, self.n_max));
        }
        if self.energies.is_empty() || self.energies.iter().any(|e| !e.is_finite()) {
            return bad("energies", "need at least one finite energy".into());
        }
        if !self.generic_beta.is_finite() {
            return bad("generic_beta", "must be finite".into());
        }
        if self.l_points < 3 {
            return bad("l_points", format!("need at least 3, got {}", self.l_points));
        }
        self.integration.validate()
    }

    /// Number of independent (energy, realization) tasks.
    pub fn task_count(&self) -> u64 {
        self.realizations * self.energies.len() as u64
    }

    /// End of the integration range, `(n_max + 1)³`.
    pub fn xi_end(&self) -> f64 {
        ((self.n_max + 1) as f64).powi(3)
    }

    /// Logarithmic grid of `L` spanning three decades below `x(ξ_end)`.
    pub fn l_grid(&self) -> Vec<f64> {
        l_grid_for(self.xi_end(), self.l_points)
    }
}

fn l_grid_for(xi_end: f64, points: usize) -> Vec<f64> {
    let hi = x_of_xi_unchecked(xi_end);
    let lo = (hi / 1000.0).max(2.0 * crate::LIOUVILLE_C);
    (0..points).map(|i| lo * (hi / lo).powf(i as f64 / (points - 1) as f64)).collect()
}

/// Per-realization output of a carried-phase run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealizationRecord {
    pub realization: u64,
    pub seed: u64,
    pub energy: f64,
    /// `logR(n³)` of the generic solution for `n = 1 ..= n_max + 1`.
    pub log_r: Vec<f64>,
    /// Phase of the generic solution at `n³`, same indexing.
    pub theta: Vec<f64>,
    pub beta_star: Option<f64>,
    pub spread: f64,
    /// `log ∫|u|² dx` up to each `L` for the generic solution.
    pub log_l2_generic: Vec<f64>,
    pub log_l2_decaying: Option<Vec<f64>>,
}

impl RealizationRecord {
    /// `Iₙ` for `n = 1 ..= n_max`.
    pub fn increments(&self) -> Vec<f64> {
        self.log_r.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// One pass of the basis pair over `[1, ξ_end]`, with L² accumulators.
struct PairRun {
    log_r: Vec<f64>,
    theta: Vec<f64>,
    beta_star: Option<f64>,
    spread: f64,
    log_l2_generic: Vec<f64>,
    log_l2_decaying: Option<Vec<f64>>,
}

#[derive(Clone, Copy)]
enum Target {
    Block,
    L,
    Both,
}

fn pair_run(
    spec: &PotentialSpec,
    energy: f64,
    blocks: u64,
    l_grid: &[f64],
    generic_beta: f64,
    cfg: &IntegrationConfig,
) -> Result<PairRun> {
    let xi_end = ((blocks + 1) as f64).powi(3);
    let mut targets: Vec<(f64, Target)> = (2..=blocks + 1).map(|n| ((n as f64).powi(3), Target::Block)).collect();
    for &l in l_grid {
        let xi = xi_of_x(l)?;
        if !(xi > 1.0 && xi <= xi_end * (1.0 + 1e-12)) {
            return Err(Error::domain(format!("L = {l} lies outside the integration range")));
        }
        targets.push((xi.min(xi_end), Target::L));
    }
    targets.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, Target)> = Vec::with_capacity(targets.len());
    for (xi, t) in targets {
        match merged.last_mut() {
            Some(last) if last.0 == xi => last.1 = Target::Both,
            _ => merged.push((xi, t)),
        }
    }

    let mut solver = PairSolver::new(spec, energy, 1.0, cfg)?;
    let start = solver.sample();
    let generic = basis_superposition(&start, generic_beta);
    let mut log_r = vec![generic.log_r];
    let mut theta = vec![generic.theta];
    let mut acc = [0.0f64; 3];
    let products = |s: &PairSample| {
        let x = x_of_xi_unchecked(s.xi);
        let p1 = s.states[0].log_r.exp() * s.states[0].theta.sin();
        let p2 = s.states[1].log_r.exp() * s.states[1].theta.sin();
        [p1 * p1 / x, p1 * p2 / x, p2 * p2 / x]
    };
    let mut prev = (start.xi, products(&start));
    let mut l_acc: Vec<[f64; 3]> = Vec::with_capacity(l_grid.len());
    for (xi, kind) in merged {
        solver.advance(xi, |s| {
            let cur = products(s);
            let h = s.xi - prev.0;
            for k in 0..3 {
                acc[k] += 0.5 * h * (prev.1[k] + cur[k]);
            }
            prev = (s.xi, cur);
        })?;
        let s = solver.sample();
        if matches!(kind, Target::Block | Target::Both) {
            let g = basis_superposition(&s, generic_beta);
            if !g.log_r.is_finite() {
                return Err(Error::NonFinite { at: xi });
            }
            log_r.push(g.log_r);
            theta.push(g.theta);
        }
        if matches!(kind, Target::L | Target::Both) {
            l_acc.push(acc);
        }
    }
    let end = solver.sample();
    let l2 = |beta: f64| -> Vec<f64> {
        let (s, c) = beta.sin_cos();
        l_acc.iter().map(|a| (s * s * a[0] + 2.0 * s * c * a[1] + c * c * a[2]).ln()).collect()
    };
    let (beta_star, spread) = match minimise_end(&end) {
        Ok((b, _, _, spread)) => (Some(b), spread),
        Err(Error::NoDistinguishedDirection { spread }) => (None, spread),
        Err(e) => return Err(e),
    };
    Ok(PairRun {
        log_r,
        theta,
        beta_star,
        spread,
        log_l2_generic: l2(generic_beta),
        log_l2_decaying: beta_star.map(l2),
    })
}

/// Growth fits for one potential: the generic direction and, when the end
/// state singles one out, the minimal-growth direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthPair {
    pub generic: GrowthFit,
    pub decaying: Option<GrowthFit>,
    pub beta_star: Option<f64>,
}

/// `∫|u|²` growth exponents for `spec` up to `L = max(l_grid)`.
pub fn growth_exponents(
    spec: &PotentialSpec,
    energy: f64,
    generic_beta: f64,
    l_grid: &[f64],
    cfg: &IntegrationConfig,
) -> Result<GrowthPair> {
    let l_max = l_grid.iter().cloned().fold(f64::MIN, f64::max);
    if l_grid.is_empty() || l_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter { field: "L grid", reason: "must be non-empty and increasing".into() });
    }
    let blocks = (xi_of_x(l_max)?.cbrt().ceil() as u64).max(2) - 1;
    let run = pair_run(spec, energy, blocks, l_grid, generic_beta, cfg)?;
    Ok(GrowthPair {
        generic: fit_growth(l_grid, run.log_l2_generic)?,
        decaying: run.log_l2_decaying.map(|v| fit_growth(l_grid, v)).transpose()?,
        beta_star: run.beta_star,
    })
}

/// `logR(n³)` curves, one per realization, on a shared block list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogRCurves {
    pub n: Vec<u64>,
    pub curves: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    pub energy: f64,
    pub lambda_hat: f64,
    pub stderr: f64,
    pub fit_range: (u64, u64),
    pub lambda_theory: f64,
    /// `(n, mean logR(n³))`.
    pub mean_curve: Vec<(u64, f64)>,
    pub realizations: usize,
}

fn mean_curve(curves: &[Vec<f64>], pick: impl Iterator<Item = usize>, len: usize) -> Vec<f64> {
    let mut m = vec![0.0; len];
    let mut count = 0usize;
    for i in pick {
        for (a, b) in m.iter_mut().zip(&curves[i]) {
            *a += b;
        }
        count += 1;
    }
    m.iter_mut().for_each(|a| *a /= count as f64);
    m
}

/// Slope of mean `logR(n³)` against `3 log n`, with a bootstrap standard
/// error over realizations.
pub fn estimate_lyapunov(curves: &LogRCurves, energy: f64, lambda_theory: f64, seed: u64) -> Result<LyapunovEstimate> {
    if curves.n.len() < MIN_FIT_BLOCKS {
        return Err(Error::InsufficientRange { needed: MIN_FIT_BLOCKS, got: curves.n.len() });
    }
    if curves.curves.is_empty() || curves.curves.iter().any(|c| c.len() != curves.n.len()) {
        return Err(Error::InvalidParameter {
            field: "curves",
            reason: "need at least one realization, each covering every block".into(),
        });
    }
    let t: Vec<f64> = curves.n.iter().map(|&n| 3.0 * (n as f64).ln()).collect();
    let m = curves.curves.len();
    let len = curves.n.len();
    let mean = mean_curve(&curves.curves, 0..m, len);
    let (slope, _, _) = line_fit(&t, &mean).ok_or_else(|| Error::FitFailure("degenerate block list".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut slopes = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut pick = vec![0usize; m];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        pick.iter_mut().for_each(|p| *p = rng.gen_range(0..m));
        let c = mean_curve(&curves.curves, pick.iter().copied(), len);
        if let Some((s, _, _)) = line_fit(&t, &c) {
            slopes.push(s);
        }
    }
    let sm = slopes.iter().sum::<f64>() / slopes.len() as f64;
    let stderr = (slopes.iter().map(|s| (s - sm).powi(2)).sum::<f64>() / (slopes.len() - 1) as f64).sqrt();
    Ok(LyapunovEstimate {
        energy,
        lambda_hat: slope,
        stderr,
        fit_range: (curves.n[0], curves.n[len - 1]),
        lambda_theory,
        mean_curve: curves.n.iter().copied().zip(mean).collect(),
        realizations: m,
    })
}

/// Per-energy summary of an ensemble run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergySummary {
    pub energy: f64,
    pub seed: u64,
    pub realizations_ok: usize,
    pub lambda_hat: f64,
    pub stderr: f64,
    /// Closed form with argument `3E/c`.
    pub lambda_theory: f64,
    /// Closed form with argument `3E`.
    pub lambda_theory_unit: f64,
    pub kappa: f64,
    /// `κ · lambda_theory`.
    pub lambda_scaled: f64,
    pub ratio: f64,
    pub reading: ReadingMatch,
    pub exponent_generic: f64,
    pub exponent_decaying: Option<f64>,
    pub predicted_generic: f64,
    pub predicted_decaying: f64,
    pub beta_star_found: usize,
    pub dimension_measured: Option<f64>,
    pub dimension_theory: Option<f64>,
    pub lyapunov: LyapunovEstimate,
    pub growth_generic: GrowthFit,
    pub growth_decaying: Option<GrowthFit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadingMatch {
    Liouville,
    Unit,
    /// The two readings differ by less than one standard error.
    Indistinguishable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleRun {
    pub summaries: Vec<EnergySummary>,
    pub records: Vec<RealizationRecord>,
    /// `(energy, realization, message)` for tasks that failed.
    pub failures: Vec<(f64, u64, String)>,
}

/// Carried-phase ensemble: every realization integrates the basis pair
/// across all blocks `1 ..= n_max` at every configured energy.
pub fn run_ensemble(template: &RandomBump, cfg: &EnsembleConfig) -> Result<EnsembleRun> {
    cfg.validate()?;
    let l_grid = cfg.l_grid();
    let tasks: Vec<(f64, u64)> =
        cfg.energies.iter().flat_map(|&e| (0..cfg.realizations).map(move |j| (e, j))).collect();
    let outcomes: Vec<std::result::Result<RealizationRecord, (f64, u64, String)>> = tasks
        .par_iter()
        .map(|&(energy, j)| {
            let seed = realization_seed(cfg.seed, j);
            let spec = PotentialSpec::RandomBump(template.reseeded(seed));
            pair_run(&spec, energy, cfg.n_max, &l_grid, cfg.generic_beta, &cfg.integration)
                .map(|r| RealizationRecord {
                    realization: j,
                    seed,
                    energy,
                    log_r: r.log_r,
                    theta: r.theta,
                    beta_star: r.beta_star,
                    spread: r.spread,
                    log_l2_generic: r.log_l2_generic,
                    log_l2_decaying: r.log_l2_decaying,
                })
                .map_err(|e| (energy, j, e.in_realization(j).to_string()))
        })
        .collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => records.push(r),
            Err(f) => failures.push(f),
        }
    }
    let mut summaries = Vec::new();
    for &energy in &cfg.energies {
        let recs: Vec<&RealizationRecord> = records.iter().filter(|r| r.energy == energy).collect();
        if recs.is_empty() {
            continue;
        }
        summaries.push(summarise(template, cfg, energy, &recs, &l_grid)?);
    }
    Ok(EnsembleRun { summaries, records, failures })
}

fn summarise(
    template: &RandomBump,
    cfg: &EnsembleConfig,
    energy: f64,
    recs: &[&RealizationRecord],
    l_grid: &[f64],
) -> Result<EnergySummary> {
    let n: Vec<u64> = (cfg.n_min..=cfg.n_max).collect();
    let curves = LogRCurves {
        n: n.clone(),
        curves: recs.iter().map(|r| n.iter().map(|&k| r.log_r[(k - 1) as usize]).collect()).collect(),
    };
    let coupling2 = template.coupling().powi(2);
    let lambda_theory = coupling2 * lyapunov_with_reading(template.bump(), energy, Reading::Liouville);
    let lambda_theory_unit = coupling2 * lyapunov_with_reading(template.bump(), energy, Reading::Unit);
    let lyapunov = estimate_lyapunov(&curves, energy, lambda_theory, cfg.seed ^ energy.to_bits())?;
    let lambda_scaled = KAPPA * lambda_theory;
    let reading = {
        let d_c = (lyapunov.lambda_hat - KAPPA * lambda_theory).abs();
        let d_1 = (lyapunov.lambda_hat - KAPPA * lambda_theory_unit).abs();
        if (KAPPA * (lambda_theory - lambda_theory_unit)).abs() < lyapunov.stderr {
            ReadingMatch::Indistinguishable
        } else if d_c <= d_1 {
            ReadingMatch::Liouville
        } else {
            ReadingMatch::Unit
        }
    };
    let mean_of = |rows: Vec<&Vec<f64>>| -> Vec<f64> {
        let k = rows.len() as f64;
        (0..l_grid.len()).map(|i| rows.iter().map(|r| r[i]).sum::<f64>() / k).collect()
    };
    let growth_generic = fit_growth(l_grid, mean_of(recs.iter().map(|r| &r.log_l2_generic).collect()))?;
    let dec: Vec<&Vec<f64>> = recs.iter().filter_map(|r| r.log_l2_decaying.as_ref()).collect();
    let beta_star_found = dec.len();
    let growth_decaying = if dec.is_empty() { None } else { Some(fit_growth(l_grid, mean_of(dec))?) };
    let lh = lyapunov.lambda_hat;
    let dim = |l: f64| from_lambda(vec![energy], vec![l], 1.0).dimension[0];
    Ok(EnergySummary {
        energy,
        seed: cfg.seed,
        realizations_ok: recs.len(),
        lambda_hat: lh,
        stderr: lyapunov.stderr,
        lambda_theory,
        lambda_theory_unit,
        kappa: KAPPA,
        lambda_scaled,
        ratio: lh / lambda_scaled,
        reading,
        exponent_generic: growth_generic.exponent,
        exponent_decaying: growth_decaying.as_ref().map(|g| g.exponent),
        predicted_generic: 0.5 + 3.0 * lh,
        predicted_decaying: (0.5 - 3.0 * lh).max(0.0),
        beta_star_found,
        dimension_measured: dim(lh),
        dimension_theory: dim(lambda_scaled),
        lyapunov,
        growth_generic,
        growth_decaying,
    })
}
