//! Experiment driver: strict TOML configs, subcommand dispatch, CSV/JSON
//! outputs and checksummed run manifests.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use anyhow::{bail, Context, Result};

use config::{RunConfig, Subcommand};
use output::{OutDir, RunManifest};

/// Environment variable overriding the configured output directory.
pub const OUT_ENV: &str = "STARKLAB_OUT";
pub const DEFAULT_OUT: &str = "starklab-out";

/// A resolved command line.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub subcommand: Subcommand,
    pub config: RunConfig,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Run one subcommand and write its manifest. Task failures are recorded
/// in the manifest rather than returned as errors.
pub fn run(inv: Invocation) -> Result<RunManifest> {
    let mut cfg = inv.config;
    if let Some(s) = cfg.subcommand {
        if s != inv.subcommand {
            bail!("config is for `{}` but `{}` was requested", s.name(), inv.subcommand.name());
        }
    }
    cfg.subcommand = Some(inv.subcommand);
    if let Some(seed) = inv.seed {
        cfg.seed = seed;
    }
    let jobs =
        inv.jobs.or(cfg.jobs).unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    if jobs == 0 {
        bail!("--jobs must be at least 1");
    }
    cfg.jobs = Some(jobs);
    let out = inv.out.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    cfg.out = Some(out.clone());
    cfg.validate()?;

    let mut dir = OutDir::prepare(&out)?;
    let started = timestamp();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().context("building worker pool")?;
    let tasks = pool.install(|| commands::execute(&cfg, inv.subcommand, &mut dir))?;
    let manifest = RunManifest {
        artifact: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        subcommand: inv.subcommand.name().to_string(),
        seed: cfg.seed,
        jobs,
        started,
        finished: timestamp(),
        config: cfg,
        tasks,
        files: Vec::new(),
    };
    dir.finish(manifest)
}
