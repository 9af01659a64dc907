use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;
use starklab::config::{load_config, Subcommand};
use starklab::{run, Invocation, OUT_ENV};

/// Numerical lab for Stark operators with decaying and random perturbations.
#[derive(Debug, Parser)]
#[command(name = "starklab", version)]
struct Cli {
    #[arg(value_enum)]
    subcommand: Subcommand,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `out`.
    #[arg(long, env = OUT_ENV)]
    out: Option<PathBuf>,
    /// Master seed; overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    let config = load_config(&cli.config)?;
    let manifest =
        run(Invocation { subcommand: cli.subcommand, config, out: cli.out, seed: cli.seed, jobs: cli.jobs })?;
    let failed = manifest.failed_tasks();
    let dir = manifest.config.out.as_deref().map(|p| p.display().to_string()).unwrap_or_default();
    eprintln!(
        "{}: {} tasks, {} failed, {} files in {dir}",
        manifest.subcommand,
        manifest.tasks.len(),
        failed,
        manifest.files.len()
    );
    for t in manifest.tasks.iter().filter(|t| !t.ok) {
        eprintln!("  {}: {}", t.task, t.error.as_deref().unwrap_or(""));
    }
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(2) })
}
