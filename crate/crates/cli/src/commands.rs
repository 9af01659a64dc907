use std::io::Write;

use anyhow::Result;
use rayon::prelude::*;
use serde::Serialize;
use starklab_core::integrator::{integrate_prufer, integrate_prufer_capture, l2_growth, Capture, Trajectory};
use starklab_core::potentials::{smoothness_report, ProbeGrid, SmoothnessReport};
use starklab_core::randomized::{
    block_statistics, run_block_ensemble, run_ensemble, BlockOptions, BlockStats, EnergySummary, ThetaMode,
};
use starklab_core::transforms::{x_of_xi, xi_of_x, PruferState};
use starklab_core::wkb::{decompose, keyint_partial, wkb_residual, KeyintPartials, ResidualReport, WkbSolution};
use starklab_core::LIOUVILLE_C;

use crate::config::{RunConfig, Subcommand};
use crate::output::{num, OutDir, TaskStatus};

pub fn execute(cfg: &RunConfig, sub: Subcommand, out: &mut OutDir) -> Result<Vec<TaskStatus>> {
    match sub {
        Subcommand::Solve => solve(cfg, out),
        Subcommand::WkbCompare => wkb_compare(cfg, out),
        Subcommand::Ensemble => ensemble(cfg, out),
        Subcommand::DiagnoseSmoothness => diagnose_smoothness(cfg, out),
    }
}

fn task_name(kind: &str, i: usize, energy: f64) -> String {
    format!("{kind}[{i}] E={energy}")
}

#[derive(Serialize)]
struct SolveRecord {
    #[serde(rename = "E")]
    energy: f64,
    file: String,
    beta: f64,
    steps: u64,
    samples: usize,
    log_r_end: f64,
    theta_end: f64,
    l2_exponent: Option<f64>,
    l2_note: Option<String>,
}

#[derive(Serialize)]
struct Summary<'a, T> {
    subcommand: &'static str,
    seed: u64,
    potential: String,
    results: &'a [T],
}

fn solve(cfg: &RunConfig, out: &mut OutDir) -> Result<Vec<TaskStatus>> {
    let spec = cfg.potential_spec()?;
    let energies = cfg.energy_list()?;
    let s = &cfg.solve;
    let runs: Vec<_> = energies
        .par_iter()
        .map(|&e| -> starklab_core::Result<(Trajectory, Option<f64>, Option<String>)> {
            let traj = integrate_prufer(&spec, e, (s.range[0], s.range[1]), s.beta, &cfg.integration)?;
            let (exp, note) = if s.l_points >= 3 {
                let hi = x_of_xi(s.range[1])?;
                let lo = (hi / 1000.0).max(1.01 * x_of_xi(s.range[0])?);
                let grid: Vec<f64> =
                    (0..s.l_points).map(|i| lo * (hi / lo).powf(i as f64 / (s.l_points - 1) as f64)).collect();
                match l2_growth(&traj, &grid) {
                    Ok(f) => (Some(f.exponent), None),
                    Err(err) => (None, Some(err.to_string())),
                }
            } else {
                (None, None)
            };
            Ok((traj, exp, note))
        })
        .collect();
    let mut tasks = Vec::new();
    let mut records = Vec::new();
    for (i, (run, &e)) in runs.into_iter().zip(&energies).enumerate() {
        let name = task_name("solve", i, e);
        match run {
            Ok((traj, l2_exponent, l2_note)) => {
                let file = format!("trajectory_{i:03}.csv");
                out.write(&file, |w| {
                    writeln!(w, "# master_seed={} E={}", cfg.seed, num(e))?;
                    traj.write_csv(&mut *w)
                })?;
                if s.binary {
                    out.write(&format!("trajectory_{i:03}.bin"), |w| traj.write_binary(w))?;
                }
                let last = traj.len() - 1;
                let (log_r_end, theta_end) = match traj.states() {
                    starklab_core::integrator::States::Prufer(st) => (st[last].log_r, st[last].theta),
                    _ => (traj.log_r(last), f64::NAN),
                };
                records.push(SolveRecord {
                    energy: e,
                    file,
                    beta: s.beta,
                    steps: traj.steps(),
                    samples: traj.len(),
                    log_r_end,
                    theta_end,
                    l2_exponent,
                    l2_note,
                });
                tasks.push(TaskStatus::ok(name));
            }
            Err(err) => tasks.push(TaskStatus::failed(name, err)),
        }
    }
    out.write_json(
        "summary.json",
        &Summary { subcommand: "solve", seed: cfg.seed, potential: cfg.potential_spec()?.label(), results: &records },
    )?;
    Ok(tasks)
}

#[derive(Serialize)]
struct WkbRecord {
    #[serde(rename = "E")]
    energy: f64,
    anchor: f64,
    provenance: starklab_core::wkb::Provenance,
    zeta: f64,
    reports: Vec<ResidualReport>,
    strictly_decreasing: bool,
    phase_table: String,
}

/// `(x, phase, amplitude, Re u₊, Im u₊)`.
type PhaseRow = (f64, f64, f64, f64, f64);

fn wkb_compare(cfg: &RunConfig, out: &mut OutDir) -> Result<Vec<TaskStatus>> {
    let spec = cfg.potential_spec()?;
    let energies = cfg.energy_list()?;
    let w = &cfg.wkb;
    let windows: Vec<(f64, f64)> = w.windows.iter().map(|p| (p[0], p[1])).collect();
    let runs: Vec<_> = energies
        .par_iter()
        .map(|&e| -> starklab_core::Result<(WkbRecord, Vec<PhaseRow>)> {
            let d = decompose(&spec, None)?;
            let provenance = d.provenance();
            let last = windows[windows.len() - 1].1;
            let zeta = d.zeta(d.x_min().max(1.0), last, 200)?.zeta;
            let sol = WkbSolution::new(d, e)?;
            let xi_windows = windows
                .iter()
                .map(|&(a, b)| Ok((xi_of_x(a)?, xi_of_x(b)?)))
                .collect::<starklab_core::Result<Vec<_>>>()?;
            let capture = Capture { stride: Some(w.capture_stride), windows: xi_windows.clone() };
            let init = PruferState { log_r: 0.0, theta: w.beta };
            let traj = integrate_prufer_capture(
                &spec,
                e,
                (1.0, xi_windows[xi_windows.len() - 1].1),
                init,
                &cfg.integration,
                &capture,
            )?;
            let reports = windows
                .windows(2)
                .map(|p| wkb_residual(&traj, &sol, p[0], p[1]))
                .collect::<starklab_core::Result<Vec<_>>>()?;
            let strictly_decreasing = reports.windows(2).all(|r| r[1].residual < r[0].residual);
            let lo = sol.anchor().max(1.0).max(LIOUVILLE_C);
            let n = w.phase_points.max(2);
            let xs: Vec<f64> = (0..n).map(|i| lo * (last / lo).powf(i as f64 / (n - 1) as f64)).collect();
            let phases = sol.phases(&xs)?;
            let table = xs
                .iter()
                .zip(phases)
                .map(|(&x, p)| {
                    let a = sol.amplitude(x)?;
                    Ok((x, p, a, a * p.cos(), a * p.sin()))
                })
                .collect::<starklab_core::Result<Vec<_>>>()?;
            let rec = WkbRecord {
                energy: e,
                anchor: sol.anchor(),
                provenance,
                zeta,
                reports,
                strictly_decreasing,
                phase_table: String::new(),
            };
            Ok((rec, table))
        })
        .collect();
    let mut tasks = Vec::new();
    let mut records = Vec::new();
    for (i, (run, &e)) in runs.into_iter().zip(&energies).enumerate() {
        let name = task_name("wkb-compare", i, e);
        match run {
            Ok((mut rec, table)) => {
                rec.phase_table = format!("phase_{i:03}.csv");
                out.write(&rec.phase_table, |w| {
                    writeln!(w, "# master_seed={} E={}", cfg.seed, num(e))?;
                    writeln!(w, "x,phase,amplitude,re_u_plus,im_u_plus")?;
                    for (x, p, a, re, im) in &table {
                        writeln!(w, "{},{},{},{},{}", num(*x), num(*p), num(*a), num(*re), num(*im))?;
                    }
                    Ok(())
                })?;
                records.push(rec);
                tasks.push(TaskStatus::ok(name));
            }
            Err(err) => tasks.push(TaskStatus::failed(name, err)),
        }
    }
    out.write_json(
        "wkb_residuals.json",
        &Summary { subcommand: "wkb-compare", seed: cfg.seed, potential: spec.label(), results: &records },
    )?;
    Ok(tasks)
}

#[derive(Serialize)]
struct EnsembleSummary<'a> {
    subcommand: &'static str,
    seed: u64,
    potential: String,
    realizations: u64,
    n_min: u64,
    n_max: u64,
    energies: &'a [EnergySummary],
    failures: usize,
    blocks: Option<BlockSummary>,
}

#[derive(Serialize)]
struct BlockSummary {
    realizations: u64,
    antithetic: bool,
    stats: Vec<BlockStats>,
    /// `(max − min)/mean` of the measured normalisation per energy.
    kappa_spread: Vec<f64>,
}

fn ensemble(cfg: &RunConfig, out: &mut OutDir) -> Result<Vec<TaskStatus>> {
    let template = cfg.random_template()?;
    let ecfg = cfg.ensemble_config();
    let run = run_ensemble(&template, &ecfg)?;
    let mut tasks = Vec::new();
    for (i, &e) in ecfg.energies.iter().enumerate() {
        for j in 0..ecfg.realizations {
            let name = format!("ensemble[{i}] E={e} realization={j}");
            match run.failures.iter().find(|f| f.0 == e && f.1 == j) {
                Some(f) => tasks.push(TaskStatus::failed(name, &f.2)),
                None => tasks.push(TaskStatus::ok(name)),
            }
        }
        out.write(&format!("ensemble_{i:03}.csv"), |w| {
            writeln!(w, "# master_seed={} E={}", cfg.seed, num(e))?;
            writeln!(w, "realization,n,I_n,logR_cum")?;
            for r in run.records.iter().filter(|r| r.energy == e) {
                for n in 1..r.log_r.len() {
                    writeln!(w, "{},{},{},{}", r.realization, n, num(r.log_r[n] - r.log_r[n - 1]), num(r.log_r[n]))?;
                }
            }
            Ok(())
        })?;
    }
    let blocks = match &cfg.ensemble.blocks {
        None => None,
        Some(b) => {
            let opts = BlockOptions { theta: ThetaMode::Random, antithetic: b.antithetic };
            let mut stats = Vec::new();
            let mut kappa_spread = Vec::new();
            for (i, &e) in ecfg.energies.iter().enumerate() {
                let mut kappas = Vec::new();
                for &n in &b.n {
                    let name = format!("blocks[{i}] E={e} n={n}");
                    let res = run_block_ensemble(&template, e, n, b.realizations, cfg.seed, &cfg.integration, opts)
                        .and_then(|inc| block_statistics(&inc, &template, e, b.antithetic));
                    match res {
                        Ok(s) => {
                            kappas.push(s.kappa);
                            stats.push(s);
                            tasks.push(TaskStatus::ok(name));
                        }
                        Err(err) => tasks.push(TaskStatus::failed(name, err)),
                    }
                }
                let mean = kappas.iter().sum::<f64>() / kappas.len().max(1) as f64;
                let (lo, hi) =
                    kappas.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &k| (l.min(k), h.max(k)));
                kappa_spread.push(if kappas.is_empty() { f64::NAN } else { (hi - lo) / mean });
            }
            out.write("blocks.csv", |w| {
                writeln!(w, "# master_seed={}", cfg.seed)?;
                writeln!(w, "E,n,count,mean,stderr,expected,kappa,max_abs,envelope")?;
                for s in &stats {
                    writeln!(
                        w,
                        "{},{},{},{},{},{},{},{},{}",
                        num(s.energy),
                        s.n,
                        s.count,
                        num(s.mean),
                        num(s.stderr),
                        num(s.expected),
                        num(s.kappa),
                        num(s.max_abs),
                        num(s.envelope)
                    )?;
                }
                Ok(())
            })?;
            Some(BlockSummary { realizations: b.realizations, antithetic: b.antithetic, stats, kappa_spread })
        }
    };
    out.write_json(
        "summary.json",
        &EnsembleSummary {
            subcommand: "ensemble",
            seed: cfg.seed,
            potential: cfg.potential_spec()?.label(),
            realizations: ecfg.realizations,
            n_min: ecfg.n_min,
            n_max: ecfg.n_max,
            energies: &run.summaries,
            failures: run.failures.len(),
            blocks,
        },
    )?;
    Ok(tasks)
}

#[derive(Serialize)]
struct KeyintRecord {
    #[serde(rename = "E")]
    energy: f64,
    variation: f64,
    variation1: Option<f64>,
    note: Option<String>,
    file: String,
}

#[derive(Serialize)]
struct SmoothnessSummary<'a> {
    subcommand: &'static str,
    seed: u64,
    potential: String,
    smoothness: Option<&'a SmoothnessReport>,
    keyint: &'a [KeyintRecord],
}

fn diagnose_smoothness(cfg: &RunConfig, out: &mut OutDir) -> Result<Vec<TaskStatus>> {
    let spec = cfg.potential_spec()?;
    let m = &cfg.smoothness;
    let mut tasks = Vec::new();
    let report = match ProbeGrid::new(m.from, m.to, m.intervals).and_then(|g| smoothness_report(&spec, m.alpha, g)) {
        Ok(r) => {
            tasks.push(TaskStatus::ok("smoothness"));
            Some(r)
        }
        Err(err) => {
            tasks.push(TaskStatus::failed("smoothness", err));
            None
        }
    };
    let k = &m.keyint;
    let grid: Vec<f64> = (0..k.count).map(|i| k.from * (k.to / k.from).powf(i as f64 / (k.count - 1) as f64)).collect();
    let energies = cfg.energy_list()?;
    let runs: Vec<starklab_core::Result<KeyintPartials>> =
        energies.par_iter().map(|&e| keyint_partial(&spec, e, m.beta, &grid, &cfg.integration)).collect();
    let mut records = Vec::new();
    for (i, (run, &e)) in runs.into_iter().zip(&energies).enumerate() {
        let name = task_name("keyint", i, e);
        match run {
            Ok(p) => {
                let file = format!("keyint_{i:03}.csv");
                out.write(&file, |w| {
                    writeln!(w, "# master_seed={} E={}", cfg.seed, num(e))?;
                    writeln!(w, "N,keyint,keyint1")?;
                    for (j, n) in p.n.iter().enumerate() {
                        let k1 = p.keyint1.as_ref().map(|v| num(v[j])).unwrap_or_default();
                        writeln!(w, "{},{},{}", num(*n), num(p.keyint[j]), k1)?;
                    }
                    Ok(())
                })?;
                records.push(KeyintRecord {
                    energy: e,
                    variation: p.variation(k.from, k.to),
                    variation1: p.variation1(k.from, k.to),
                    note: p.keyint1_note.clone(),
                    file,
                });
                tasks.push(TaskStatus::ok(name));
            }
            Err(err) => tasks.push(TaskStatus::failed(name, err)),
        }
    }
    out.write_json(
        "smoothness.json",
        &SmoothnessSummary {
            subcommand: "diagnose-smoothness",
            seed: cfg.seed,
            potential: spec.label(),
            smoothness: report.as_ref(),
            keyint: &records,
        },
    )?;
    Ok(tasks)
}
