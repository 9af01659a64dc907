use std::fs;
use std::path::Path;
use std::process::Command;

use starklab::config::{parse_config, Subcommand};
use starklab::output::{RunManifest, MANIFEST};
use starklab::{run, Invocation, OUT_ENV};

fn invoke(sub: Subcommand, text: &str, out: &Path, jobs: usize) -> RunManifest {
    let config = parse_config(text, None).unwrap();
    run(Invocation { subcommand: sub, config, out: Some(out.to_path_buf()), seed: None, jobs: Some(jobs) }).unwrap()
}

const SOLVE: &str = "seed = 5\nenergies = [0.0, 1.5]\n[potential]\nkind = \"zero\"\n[solve]\nrange = [1.0, 2000.0]\n";

fn listing(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> =
        fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    v.sort();
    v
}

#[test]
fn solve_writes_trajectory_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let m = invoke(Subcommand::Solve, SOLVE, tmp.path(), 1);
    assert_eq!(m.failed_tasks(), 0);
    assert_eq!(m.seed, 5);
    let mut inventory: Vec<String> = m.files.iter().map(|f| f.path.clone()).collect();
    inventory.push(MANIFEST.to_string());
    inventory.sort();
    assert_eq!(listing(tmp.path()), inventory);
    RunManifest::load(tmp.path()).unwrap().verify(tmp.path()).unwrap();
    let csv = fs::read_to_string(tmp.path().join("trajectory_000.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().contains("master_seed=5"));
    assert_eq!(lines.next().unwrap(), "xi,x,logR,theta");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    // 17 significant digits: d.dddddddddddddddde±x
    assert!(first.iter().all(|f| f.split('e').next().unwrap().trim_start_matches('-').len() == 18));
}

#[test]
fn worker_count_does_not_change_outputs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = invoke(Subcommand::Solve, SOLVE, a.path(), 1);
    let mb = invoke(Subcommand::Solve, SOLVE, b.path(), 3);
    assert_eq!(ma.files, mb.files);
}

#[test]
fn rerun_replaces_previous_outputs_only() {
    let tmp = tempfile::tempdir().unwrap();
    invoke(Subcommand::Solve, SOLVE, tmp.path(), 1);
    let one = "energies = [0.0]\n[solve]\nrange = [1.0, 500.0]\n";
    let m = invoke(Subcommand::Solve, one, tmp.path(), 1);
    assert_eq!(listing(tmp.path()).len(), m.files.len() + 1);

    fs::write(tmp.path().join("notes.txt"), "mine").unwrap();
    let config = parse_config(one, None).unwrap();
    let err = run(Invocation {
        subcommand: Subcommand::Solve,
        config,
        out: Some(tmp.path().into()),
        seed: None,
        jobs: Some(1),
    })
    .unwrap_err();
    assert!(err.to_string().contains("notes.txt"));
}

#[test]
fn mismatched_subcommand_is_rejected() {
    let config = parse_config("subcommand = \"ensemble\"\n", None).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let inv =
        Invocation { subcommand: Subcommand::Solve, config, out: Some(tmp.path().into()), seed: None, jobs: None };
    assert!(run(inv).is_err());
}

#[test]
fn smoothness_reports_keyint_variation() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "energies = [1.0]\n[smoothness]\nintervals = 50\nkeyint = { from = 1e2, to = 1e3, count = 5 }\n";
    let m = invoke(Subcommand::DiagnoseSmoothness, text, tmp.path(), 1);
    assert_eq!(m.failed_tasks(), 0);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("smoothness.json")).unwrap()).unwrap();
    assert!(json["keyint"][0]["variation"].as_f64().unwrap() < 0.1);
    assert_eq!(json["smoothness"]["holder_sup"].as_f64().unwrap(), 0.0);
}

#[test]
fn ensemble_summary_carries_lambda() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "seed = 9\n[potential]\nkind = \"random_bump\"\n\
                [ensemble]\nrealizations = 2\nn_min = 4\nn_max = 14\nl_points = 10\n";
    let m = invoke(Subcommand::Ensemble, text, tmp.path(), 2);
    assert_eq!(m.failed_tasks(), 0);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(json["seed"], 9);
    let e = &json["energies"][0];
    for key in ["lambda_hat", "stderr", "lambda_theory", "exponent_generic"] {
        assert!(e[key].is_number(), "{key}");
    }
    let csv = fs::read_to_string(tmp.path().join("ensemble_000.csv")).unwrap();
    assert_eq!(csv.lines().nth(1).unwrap(), "realization,n,I_n,logR_cum");
    assert_eq!(csv.lines().count(), 2 + 2 * 14);
}

#[test]
fn binary_honours_env_override_and_exit_status() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    // E = -50 puts the first window below the WKB anchor, so that task fails
    fs::write(
        &cfg,
        "energies = [-50.0, 1.0]\n[potential]\nkind = \"zero\"\n\
         [wkb]\nwindows = [[10.0, 20.0], [100.0, 200.0]]\nphase_points = 10\n",
    )
    .unwrap();
    let out = tmp.path().join("from-env");
    let status = Command::new(env!("CARGO_BIN_EXE_starklab"))
        .args(["wkb-compare", "--config"])
        .arg(&cfg)
        .env(OUT_ENV, &out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let m = RunManifest::load(&out).unwrap();
    assert_eq!(m.failed_tasks(), 1);
    assert!(m.tasks[1].ok);
    m.verify(&out).unwrap();

    let flag = tmp.path().join("from-flag");
    let status = Command::new(env!("CARGO_BIN_EXE_starklab"))
        .args(["solve", "--seed", "77", "--jobs", "1", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&flag)
        .env(OUT_ENV, tmp.path().join("unused"))
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(RunManifest::load(&flag).unwrap().seed, 77);
    assert!(!tmp.path().join("unused").exists());
}

#[test]
fn misspelled_key_fails_binary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "[integration]\nrtool = 1e-9\n").unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_starklab"))
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("o"))
        .output()
        .unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("rtool"));
}
