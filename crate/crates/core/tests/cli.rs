// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use collapse_lab::bounds::{default_constraints, exclusion_region, GridSpec};
use collapse_lab::io::{self, RunManifest, Table, MANIFEST_FILE};
use collapse_lab::PhysicalConstants;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_collapse-lab"));
    c.env_remove("COLLAPSE_LAB_CONSTANTS");
    c
}

fn run(sub: &str, config: &Path, extra: &[&str]) -> Output {
    bin().arg(sub).arg("--config").arg(config).args(extra).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn manifest(dir: &Path) -> RunManifest {
    serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_FILE)).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn predict_writes_outputs_and_a_verifiable_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "p.json", r#"{"subcommand": "predict"}"#);
    let out = tmp.path().join("out");
    let o = run("predict", &cfg, &["--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = manifest(&out);
    assert_eq!(m.subcommand.as_str(), "predict");
    assert!(!m.outputs.is_empty());
    assert!(io::verify_manifest(&m, &out).unwrap().is_empty());
    let stdout = String::from_utf8_lossy(&o.stdout);
    for entry in &m.outputs {
        assert!(stdout.contains(&entry.sha256));
    }
    fs::write(out.join(&m.outputs[0].file), "tampered\n").unwrap();
    assert_eq!(io::verify_manifest(&m, &out).unwrap(), vec![m.outputs[0].file.clone()]);
}

#[test]
fn bounds_are_deterministic_and_rerunnable_from_the_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_text = r#"{"subcommand": "bounds", "bounds": {"grid": {"r_c_min": 1e-9, "r_c_max": 1e-3, "r_c_points": 31, "lambda_min": 1e-20, "lambda_max": 1e-4, "lambda_points": 41}}}"#;
    let cfg = write_config(tmp.path(), "b.json", cfg_text);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run("bounds", &cfg, &["--out", a.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(run("bounds", &cfg, &["--out", b.to_str().unwrap(), "--workers", "3"]).status.code(), Some(0));
    let (ma, mb) = (manifest(&a), manifest(&b));
    let sums = |m: &RunManifest| m.outputs.iter().map(|o| (o.file.clone(), o.sha256.clone())).collect::<Vec<_>>();
    assert_eq!(sums(&ma), sums(&mb));

    // the resolved config stored in the manifest reproduces the outputs
    let c = tmp.path().join("c");
    let mut replay = ma.config.clone();
    replay.output.dir = c.clone();
    let replay_path = write_config(tmp.path(), "replay.json", &serde_json::to_string(&replay).unwrap());
    assert_eq!(run("bounds", &replay_path, &[]).status.code(), Some(0));
    assert_eq!(sums(&manifest(&c)), sums(&ma));

    // the input file is left untouched
    assert_eq!(fs::read_to_string(&cfg).unwrap(), cfg_text);
}

#[test]
fn exclusion_grid_csv_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "b.json", r#"{"subcommand": "bounds"}"#);
    let out = tmp.path().join("out");
    assert_eq!(run("bounds", &cfg, &["--out", out.to_str().unwrap()]).status.code(), Some(0));
    let text = fs::read_to_string(out.join("exclusion_grid.csv")).unwrap();
    let parsed = Table::from_csv("exclusion_grid", &text).unwrap();
    assert_eq!(parsed.rows.len(), 121 * 161);
    assert_eq!(parsed.to_csv().unwrap(), text);
    let direct = exclusion_region(&default_constraints(), &GridSpec::default(), &PhysicalConstants::codata()).unwrap();
    assert_eq!(io::exclusion_table(&direct).to_csv().unwrap(), text);
}

#[test]
fn trajectory_output_depends_only_on_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "t.json",
        r#"{"subcommand": "trajectory", "trajectory": {"ensemble": 40, "steps": 400, "record_every": 100, "duration": 1.0}}"#,
    );
    let dirs: Vec<_> = ["s1", "s1b", "s2"].iter().map(|d| tmp.path().join(d)).collect();
    for (d, seed, workers) in [(&dirs[0], "7", "1"), (&dirs[1], "7", "4"), (&dirs[2], "8", "1")] {
        let o = run("trajectory", &cfg, &["--out", d.to_str().unwrap(), "--seed", seed, "--workers", workers]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let read = |d: &Path| fs::read(d.join("aggregate.csv")).unwrap();
    assert_eq!(read(&dirs[0]), read(&dirs[1]));
    assert_ne!(read(&dirs[0]), read(&dirs[2]));
    assert_eq!(manifest(&dirs[0]).config.master_seed, 7);
}

#[test]
fn misspelled_key_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "p.json", "{\"subcommand\": \"predict\",\n \"predict\": {\"lamda\": 1e-16}}");
    let o = run("predict", &cfg, &["--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lamda"), "{}", stderr(&o));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
    assert!(!tmp.path().join("o").exists());
}

#[test]
fn negative_lambda_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "p.json", r#"{"subcommand": "predict", "predict": {"lambda": -1}}"#);
    let o = run("predict", &cfg, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("λ must be ≥ 0"), "{}", stderr(&o));
}

#[test]
fn subcommand_mismatch_and_missing_file_are_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "p.json", r#"{"subcommand": "predict"}"#);
    assert_eq!(run("bounds", &cfg, &[]).status.code(), Some(2));
    assert_eq!(run("predict", &tmp.path().join("absent.json"), &[]).status.code(), Some(2));
    let foreign = write_config(tmp.path(), "f.json", r#"{"subcommand": "predict", "bounds": {}}"#);
    assert_eq!(run("predict", &foreign, &[]).status.code(), Some(2));
}

#[test]
fn broken_constants_file_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "p.json", r#"{"subcommand": "predict"}"#);
    let consts = write_config(tmp.path(), "c.json", r#"{"version": "x", "hbar": -1}"#);
    let o = bin()
        .env("COLLAPSE_LAB_CONSTANTS", &consts)
        .args(["predict", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn unstable_step_is_a_numerical_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "t.json",
        r#"{"subcommand": "trajectory", "trajectory": {"model": {"model": "spin", "gamma": 1e6, "theta": 0.5, "omega": 0}, "ensemble": 2, "steps": 10, "record_every": 5, "duration": 1.0}}"#,
    );
    let o = run("trajectory", &cfg, &["--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}
