use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use starklab_core::integrator::IntegrationConfig;
use starklab_core::potentials::{AnalyticPotential, BumpFunction, PotentialSpec, RandomBump, SampledTable};
use starklab_core::randomized::EnsembleConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Solve,
    WkbCompare,
    Ensemble,
    DiagnoseSmoothness,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Solve => "solve",
            Subcommand::WkbCompare => "wkb-compare",
            Subcommand::Ensemble => "ensemble",
            Subcommand::DiagnoseSmoothness => "diagnose-smoothness",
        }
    }
}

/// The `[potential]` block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    Zero {},
    PowerDecay {
        #[serde(default = "one")]
        amplitude: f64,
        exponent: f64,
    },
    WignerVonNeumann {
        #[serde(default = "wvn_c1")]
        c1: f64,
        #[serde(default = "wvn_c2")]
        c2: f64,
    },
    Sine {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        frequency: f64,
    },
    RandomBump {
        /// Defaults to the master seed.
        seed: Option<u64>,
        #[serde(default = "one")]
        coupling: f64,
        /// Two-column `t f(t)` table replacing the standard bump shape.
        table: Option<PathBuf>,
        /// Multiplier of the bump shape; unit integral when absent.
        scale: Option<f64>,
    },
}

fn one() -> f64 {
    1.0
}
fn wvn_c1() -> f64 {
    -12.0
}
fn wvn_c2() -> f64 {
    4.0 / 3.0
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig::Zero {}
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyRange {
    pub from: f64,
    pub to: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveSection {
    /// ξ-range of the run.
    pub range: [f64; 2],
    pub beta: f64,
    pub binary: bool,
    /// Points of the L grid for the `∫|u|²` growth fit; 0 skips it.
    pub l_points: usize,
}

impl Default for SolveSection {
    fn default() -> Self {
        SolveSection { range: [1.0, 1e4], beta: 0.0, binary: false, l_points: 40 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WkbSection {
    pub beta: f64,
    /// Windows in `x`; each later window is tested against a fit on the
    /// one before it.
    pub windows: Vec<[f64; 2]>,
    /// ξ-spacing of samples inside the windows.
    pub capture_stride: f64,
    pub phase_points: usize,
}

impl Default for WkbSection {
    fn default() -> Self {
        WkbSection {
            beta: 0.7,
            windows: vec![[10.0, 20.0], [1e2, 2e2], [1e3, 2e3], [1e4, 2e4]],
            capture_stride: 0.25,
            phase_points: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlockSection {
    pub n: Vec<u64>,
    pub realizations: u64,
    pub antithetic: bool,
}

impl Default for BlockSection {
    fn default() -> Self {
        BlockSection { n: vec![10, 20, 40], realizations: 2000, antithetic: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    pub realizations: u64,
    pub n_min: u64,
    pub n_max: u64,
    pub generic_beta: f64,
    pub l_points: usize,
    /// Single-block increment runs; skipped when absent.
    pub blocks: Option<BlockSection>,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        let d = EnsembleConfig::default();
        EnsembleSection {
            realizations: d.realizations,
            n_min: d.n_min,
            n_max: d.n_max,
            generic_beta: d.generic_beta,
            l_points: d.l_points,
            blocks: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SmoothnessSection {
    pub from: f64,
    pub to: f64,
    pub intervals: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Partial key integrals at `count` log-spaced `N` in `[from, to]`.
    pub keyint: EnergyRange,
}

impl Default for SmoothnessSection {
    fn default() -> Self {
        SmoothnessSection {
            from: 10.0,
            to: 1e3,
            intervals: 2000,
            alpha: 0.5,
            beta: 0.3,
            keyint: EnergyRange { from: 1e3, to: 1e5, count: 41 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: Option<Subcommand>,
    #[serde(default)]
    pub seed: u64,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub energies: Option<Vec<f64>>,
    pub energy_range: Option<EnergyRange>,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default)]
    pub integration: IntegrationConfig,
    #[serde(default)]
    pub solve: SolveSection,
    #[serde(default)]
    pub wkb: WkbSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub smoothness: SmoothnessSection,
}

/// Parse and validate; `base` resolves relative table paths.
pub fn parse_config(text: &str, base: Option<&Path>) -> Result<RunConfig> {
    let mut cfg: RunConfig = toml::from_str(text).map_err(|e| anyhow::anyhow!("config: {e}"))?;
    if let (Some(base), PotentialConfig::RandomBump { table: Some(t), .. }) = (base, &mut cfg.potential) {
        if t.is_relative() {
            *t = base.join(&*t);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text, path.parent()).with_context(|| format!("in {}", path.display()))
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.integration.validate().context("integration")?;
        self.energy_list()?;
        self.potential_spec().context("potential")?;
        if self.jobs == Some(0) {
            bail!("jobs: must be at least 1");
        }
        let s = &self.solve;
        if !(s.range[0] >= 1.0 && s.range[1] > s.range[0] && s.range[1].is_finite()) {
            bail!("solve.range: need 1 <= start < end, got {:?}", s.range);
        }
        let w = &self.wkb;
        if w.windows.len() < 2 {
            bail!("wkb.windows: need at least two windows, got {}", w.windows.len());
        }
        if w.windows.iter().any(|p| !(p[0] >= 1.0 && p[1] > p[0]))
            || w.windows.windows(2).any(|p| !(p[0][1] <= p[1][0]))
        {
            bail!("wkb.windows: windows must be increasing, disjoint and start at x >= 1");
        }
        if !(w.capture_stride > 0.0) {
            bail!("wkb.capture_stride: must be positive, got {}", w.capture_stride);
        }
        self.ensemble_config().validate().context("ensemble")?;
        if let Some(b) = &self.ensemble.blocks {
            if b.n.is_empty() || b.n.iter().any(|&n| n < 1) {
                bail!("ensemble.blocks.n: need block indices >= 1");
            }
            if b.realizations == 0 || (b.antithetic && b.realizations % 2 == 1) {
                bail!("ensemble.blocks.realizations: need a positive (and, if antithetic, even) count");
            }
        }
        let m = &self.smoothness;
        if !(m.from < m.to) || m.intervals == 0 {
            bail!("smoothness: need from < to and intervals >= 1");
        }
        if !(m.alpha > 0.0 && m.alpha <= 1.0) {
            bail!("smoothness.alpha: must lie in (0, 1], got {}", m.alpha);
        }
        let k = &m.keyint;
        if !(k.from >= 1.0 && k.to > k.from && k.count >= 2) {
            bail!("smoothness.keyint: need 1 <= from < to and count >= 2");
        }
        Ok(())
    }

    pub fn energy_list(&self) -> Result<Vec<f64>> {
        let list = match (&self.energies, &self.energy_range) {
            (Some(_), Some(_)) => bail!("energies / energy_range: give one, not both"),
            (Some(v), None) => v.clone(),
            (None, Some(r)) => {
                if r.count == 0 || !(r.from <= r.to) {
                    bail!("energy_range: need from <= to and count >= 1");
                }
                if r.count == 1 {
                    vec![r.from]
                } else {
                    (0..r.count).map(|i| r.from + (r.to - r.from) * i as f64 / (r.count - 1) as f64).collect()
                }
            }
            (None, None) => vec![0.0],
        };
        if list.is_empty() || list.iter().any(|e| !e.is_finite()) {
            bail!("energies: need at least one finite energy");
        }
        Ok(list)
    }

    pub fn bump(&self) -> Result<BumpFunction> {
        let PotentialConfig::RandomBump { table, scale, .. } = &self.potential else {
            return Ok(BumpFunction::default());
        };
        let bump = match (table, scale) {
            (None, None) => BumpFunction::default(),
            (None, Some(s)) => BumpFunction::standard(*s)?,
            (Some(path), scale) => {
                let text =
                    std::fs::read_to_string(path).with_context(|| format!("table: reading {}", path.display()))?;
                let table = SampledTable::parse(&text).context("table")?;
                let raw = BumpFunction::from_table(table, 1.0)?;
                match scale {
                    Some(s) => BumpFunction::new(raw.shape().clone(), *s)?,
                    None => raw.normalized()?,
                }
            }
        };
        Ok(bump)
    }

    pub fn random_template(&self) -> Result<RandomBump> {
        let PotentialConfig::RandomBump { seed, coupling, .. } = &self.potential else {
            bail!("potential: this subcommand needs kind = \"random_bump\"");
        };
        if !coupling.is_finite() {
            bail!("coupling: must be finite");
        }
        Ok(RandomBump::new(self.bump()?, seed.unwrap_or(self.seed)).with_coupling(*coupling))
    }

    pub fn potential_spec(&self) -> Result<PotentialSpec> {
        Ok(match &self.potential {
            PotentialConfig::Zero {} => PotentialSpec::Zero,
            PotentialConfig::PowerDecay { amplitude, exponent } => PotentialSpec::power_decay(*amplitude, *exponent)?,
            PotentialConfig::WignerVonNeumann { c1, c2 } => {
                if !(c1.is_finite() && c2.is_finite()) {
                    bail!("c1/c2: must be finite");
                }
                PotentialSpec::WignerVonNeumannLike { c1: *c1, c2: *c2 }
            }
            PotentialConfig::Sine { amplitude, frequency } => {
                if !(amplitude.is_finite() && frequency.is_finite()) {
                    bail!("amplitude/frequency: must be finite");
                }
                PotentialSpec::Analytic(AnalyticPotential::sine(*amplitude, *frequency))
            }
            PotentialConfig::RandomBump { .. } => PotentialSpec::RandomBump(self.random_template()?),
        })
    }

    pub fn ensemble_config(&self) -> EnsembleConfig {
        let e = &self.ensemble;
        EnsembleConfig {
            realizations: e.realizations,
            n_min: e.n_min,
            n_max: e.n_max,
            energies: self.energy_list().unwrap_or_default(),
            seed: self.seed,
            generic_beta: e.generic_beta,
            l_points: e.l_points,
            integration: self.integration,
        }
    }
}
