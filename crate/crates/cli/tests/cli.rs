use std::path::Path;
use std::process::{Command, Output};

fn vrabi(out_dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vrabi")).args(args).env("VRABI_OUT_DIR", out_dir).env_remove("RUST_LOG").output().expect("binary runs")
}

fn recipe(name: &str) -> String {
    format!("{}/../../figures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn column_max(path: &Path, column: usize) -> f64 {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines().skip(1).map(|l| l.split(',').nth(column).unwrap().parse::<f64>().unwrap()).fold(f64::MIN, f64::max)
}

#[test]
fn selfcheck_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = vrabi(dir.path(), &["selfcheck"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn empty_grid_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.json");
    std::fs::write(&cfg, r#"{"kind":"bimodal_identical","axis":"delta_small","grid":[],"horizon":5}"#).unwrap();
    let out = vrabi(dir.path(), &["scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn malformed_config_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.json");
    std::fs::write(&cfg, r#"{"horizn": 5}"#).unwrap();
    assert_eq!(vrabi(dir.path(), &["evolve", "--config", cfg.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(vrabi(dir.path(), &["evolve", "--config", "/nonexistent.json"]).status.code(), Some(3));
    assert_eq!(vrabi(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(vrabi(dir.path(), &["evolve", "--g2", "abc"]).status.code(), Some(1));
    assert_eq!(vrabi(dir.path(), &["evolve", "--g2", "0"]).status.code(), Some(3));
    assert_eq!(vrabi(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn evolve_reaches_the_large_two_photon_peak() {
    let dir = tempfile::tempdir().unwrap();
    let out = vrabi(dir.path(), &["evolve", "--g2", "1.5", "--delta-cap", "-5", "--delta-small", "3.55", "--horizon", "25"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = dir.path().join("evolve.csv");
    let header = std::fs::read_to_string(&csv).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, "g1_t,value,delta_small");
    let peak = column_max(&csv, 1);
    assert!((0.85..=0.95).contains(&peak), "peak {peak}");
    let summary = std::fs::read_to_string(dir.path().join("evolve_summary.csv")).unwrap();
    assert!(summary.contains("3.00000000000000e-4"), "substep recorded: {summary}");
}

#[test]
fn identical_configs_give_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = a.path().join("small.json");
    std::fs::write(
        &cfg,
        r#"{"name":"s","kind":"single_mode_nonidentical","fixed":{"g2":2.0,"delta_cap":-5.0},"axis":"delta_small","grid":{"start":2.5,"stop":3.0,"step":0.25},"horizon":10}"#,
    )
    .unwrap();
    for dir in [a.path(), b.path()] {
        assert_eq!(vrabi(dir, &["scan", "--config", cfg.to_str().unwrap()]).status.code(), Some(0));
    }
    for f in ["s_row000.csv", "s_row001.csv", "s_row002.csv", "s_summary.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn flags_override_recipe_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = vrabi(dir.path(), &["scan", "--config", &recipe("fig2.json"), "--horizon", "2", "--name", "short"]);
    assert_eq!(out.status.code(), Some(0));
    let summary = std::fs::read_to_string(dir.path().join("short_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 42);
    assert!(summary.lines().skip(1).all(|l| l.split(',').nth(6) == Some("2.00000000000000e0")));
}

#[test]
fn resonance_report_is_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = vrabi(
        dir.path(),
        &["resonance", "--g2", "1.5", "--delta-cap", "-5", "--lo", "2.5", "--hi", "4.5", "--horizon", "25", "--output-step", "0.05"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["delta_omega"].is_null());
    assert_eq!(v["authoritative"], "scan");
    assert!(v["delta_scan"].as_f64().unwrap() < 5.0);
    assert!(dir.path().join("resonance.json").exists());
}

#[test]
fn spectrum_has_six_levels_and_fifteen_lines() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(vrabi(dir.path(), &["spectrum"]).status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("eigenvalue,")).count(), 6);
    assert_eq!(text.lines().filter(|l| l.starts_with("line,")).count(), 15);
    assert_eq!(vrabi(dir.path(), &["spectrum", "--kind", "single_mode"]).status.code(), Some(3));
}

#[test]
fn master_run_with_damping() {
    let dir = tempfile::tempdir().unwrap();
    let out = vrabi(dir.path(), &["master", "--kappa", "0.1", "--horizon", "10", "--output-step", "0.1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let peak = column_max(&dir.path().join("master.csv"), 1);
    assert!(peak > 0.0 && peak < 0.5);
}
