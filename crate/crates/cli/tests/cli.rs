use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn config(name: &str) -> PathBuf {
    repo().join("configs").join(name)
}

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_congestio"))
        .args([cmd, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .env_remove("CONGESTIO_OUT")
        .output()
        .expect("binary runs")
}

fn inline(dir: &TempDir, json: &str) -> PathBuf {
    let p = dir.path().join("config.json");
    fs::write(&p, json).unwrap();
    p
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Data rows of a stamped CSV, keyed by the header.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# schema_version=1"));
    let header: Vec<String> = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .collect();
    (header, rows)
}

fn assert_matches_fixture(produced: &Path, fixture: &str) {
    let (h1, r1) = read_csv(produced);
    let (h2, r2) = read_csv(
        &Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("tests/fixtures")
            .join(fixture),
    );
    assert_eq!(h1, h2);
    assert_eq!(r1.len(), r2.len());
    for (a, b) in r1.iter().zip(&r2) {
        for (k, (x, y)) in a.iter().zip(b).enumerate() {
            // per-column scale: relative 1e-9 with an absolute floor
            let tol = 1e-9 * y.abs().max(1.0) + 1e-12;
            assert!((x - y).abs() <= tol, "column {} drifted: {x} vs {y}", h1[k]);
        }
    }
}

#[test]
fn equilibrium_passes_with_zero_residuals() {
    let out = TempDir::new().unwrap();
    let o = run("simulate", &config("equilibrium.json"), out.path(), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (header, rows) = read_csv(&out.path().join("diagnostics.csv"));
    for name in [
        "mass_defect",
        "E_kinetic",
        "E_dissipated",
        "energy_defect",
        "entropy_defect",
        "pi_consistency",
    ] {
        let k = header.iter().position(|h| h == name).unwrap();
        assert!(rows.iter().all(|r| r[k] == 0.0), "{name}");
    }
    let report = read_json(&out.path().join("report.json"));
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["pass"], true);
    let snaps = read_json(&out.path().join("snapshots.json"));
    assert_eq!(snaps["schema_version"], 1);
    assert_eq!(snaps["snapshots"].as_array().unwrap().len(), 3);
}

#[test]
fn tiny_grid_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = inline(
        &dir,
        r#"{"schema_version": 1, "params": {"cells": 4}, "datum": {"kind": "equilibrium"}}"#,
    );
    let o = run("simulate", &cfg, dir.path(), &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("N must be >= 8"), "{}", stderr(&o));
}

#[test]
fn unknown_keys_and_missing_files_exit_2() {
    let dir = TempDir::new().unwrap();
    let cfg = inline(
        &dir,
        r#"{"schema_version": 1, "datum": {"kind": "equilibrium"}, "gama": 2}"#,
    );
    assert_eq!(code(&run("simulate", &cfg, dir.path(), &[])), 2);
    assert_eq!(
        code(&run("simulate", &dir.path().join("absent.json"), dir.path(), &[])),
        2
    );
}

#[test]
fn shipped_bump_passes_and_matches_fixture() {
    let out = TempDir::new().unwrap();
    let o = run("simulate", &config("bump_g40.json"), out.path(), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_matches_fixture(&out.path().join("diagnostics.csv"), "bump_g40_diagnostics.csv");
}

#[test]
fn opposing_streams_matches_fixture() {
    let out = TempDir::new().unwrap();
    let o = run("simulate", &config("opposing_g10.json"), out.path(), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_matches_fixture(&out.path().join("diagnostics.csv"), "opposing_g10_diagnostics.csv");
}

#[test]
fn invariant_failure_names_the_invariant() {
    // stiff moving bump: the velocity scheme overshoots the W bound
    let dir = TempDir::new().unwrap();
    let cfg = inline(
        &dir,
        r#"{"schema_version": 1, "params": {"gamma": 40, "cells": 400, "c_mom": 4.0},
            "datum": {"kind": "congested_bump", "u_max": 0.1}}"#,
    );
    let o = run("simulate", &cfg, dir.path(), &[]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("transported_potential_sup"), "{}", stderr(&o));
    assert_eq!(read_json(&dir.path().join("report.json"))["pass"], false);
}

#[test]
fn single_gamma_sweep_passes_and_empty_list_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = inline(
        &dir,
        r#"{"schema_version": 1, "params": {"cells": 64}, "datum": {"kind": "congested_bump"}, "gamma_list": [5]}"#,
    );
    assert_eq!(code(&run("sweep", &cfg, dir.path(), &[])), 0);
    let (_, rows) = read_csv(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 1);

    let cfg = inline(
        &dir,
        r#"{"schema_version": 1, "datum": {"kind": "congested_bump"}, "gamma_list": []}"#,
    );
    assert_eq!(code(&run("sweep", &cfg, dir.path(), &[])), 2);
}

#[test]
fn sweep_is_identical_across_worker_counts() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let o = run("sweep", &config("sweep_bump.json"), a.path(), &["--workers", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        code(&run("sweep", &config("sweep_bump.json"), b.path(), &["--workers", "4"])),
        0
    );
    let sa = fs::read(a.path().join("sweep.csv")).unwrap();
    assert_eq!(sa, fs::read(b.path().join("sweep.csv")).unwrap());
    let (_, rows) = read_csv(&a.path().join("sweep.csv"));
    assert_eq!(
        rows.iter().map(|r| r[0]).collect::<Vec<_>>(),
        vec![5.0, 10.0, 20.0, 40.0, 80.0]
    );
    assert!(rows[4][1] <= rows[0][1] / 4.0);
}

#[test]
fn simulate_output_is_byte_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for d in [&a, &b] {
        assert_eq!(
            code(&run("simulate", &config("opposing_g20_rw.json"), d.path(), &[])),
            0
        );
    }
    for f in ["diagnostics.csv", "snapshots.json", "report.json"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn sign_flow_passes_and_frozen_measure_fails() {
    let out = TempDir::new().unwrap();
    let o = run("duality", &config("duality_sign_flow.json"), out.path(), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = read_json(&out.path().join("duality_report.json"));
    assert!(r["report"]["flow_error"].as_f64().unwrap() <= r["report"]["flow_tol"].as_f64().unwrap());

    let o = run("duality", &config("duality_frozen.json"), out.path(), &[]);
    assert_eq!(code(&o), 1);
    let r = read_json(&out.path().join("duality_report.json"));
    assert!(r["report"]["relative"].as_f64().unwrap() > 0.1);
}

#[test]
fn decelerating_pair_reports_a_gap() {
    let out = TempDir::new().unwrap();
    let o = run(
        "counterexample",
        &config("counterexample_decelerating.json"),
        out.path(),
        &[],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = read_json(&out.path().join("counterexample_report.json"));
    assert_eq!(r["schema_version"], 1);
    assert!(r["report"]["gap"].as_f64().unwrap() > 0.1);
    assert_eq!(r["report"]["initial_gap"], 0.0);
}

#[test]
fn output_directory_falls_back_to_the_environment() {
    let out = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_congestio"))
        .args(["counterexample", "--config"])
        .arg(config("counterexample_remark.json"))
        .env("CONGESTIO_OUT", out.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(out.path().join("counterexample_report.json").exists());
}
