//! End-to-end tests of the command-line interface: output files, byte
//! determinism, and the exit-code contract.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_degenfrac"))
}

fn workdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("degenfrac-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, phi: &str) -> PathBuf {
    let path = dir.join("run.json");
    let prefix = dir.join("out");
    let text = serde_json::json!({
        "alpha": 0.5,
        "beta": 1.0,
        "s": 1,
        "K": "1",
        "p": ["0"],
        "phi": phi,
        "grid": {"ny": 60, "nx": 64},
        "modes": 3,
        "tolerance": 1e-3,
        "output": prefix.display().to_string()
    })
    .to_string();
    std::fs::write(&path, text).unwrap();
    path
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn solve_writes_all_outputs_and_is_byte_deterministic() {
    let dir = workdir("solve");
    let config = write_config(&dir, "sin(pi*y)");
    run_ok(bin().arg("solve").arg(&config));
    let names = [
        "out_field.csv",
        "out_spectrum.csv",
        "out_modes.csv",
        "out_diagnostics.json",
    ];
    let first: Vec<Vec<u8>> = names
        .iter()
        .map(|n| std::fs::read(dir.join(n)).unwrap())
        .collect();
    // a second identical run must overwrite with identical bytes
    run_ok(bin().arg("solve").arg(&config));
    for (name, before) in names.iter().zip(&first) {
        let after = std::fs::read(dir.join(name)).unwrap();
        assert_eq!(&after, before, "{name} changed between identical runs");
    }
    let field = String::from_utf8(first[0].clone()).unwrap();
    assert!(field.starts_with("x,y,u\n"));
    assert_eq!(field.lines().count(), 1 + 65 * 60);
    let diag: serde_json::Value =
        serde_json::from_slice(&first[3]).unwrap();
    assert_eq!(diag["modes_computed"], 3);
    assert!(diag["truncation_bound"].as_f64().unwrap() >= 0.0);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn zero_data_produces_a_field_of_literal_zeros() {
    let dir = workdir("zero");
    let config = write_config(&dir, "0");
    run_ok(bin().arg("solve").arg(&config));
    let field = std::fs::read_to_string(dir.join("out_field.csv")).unwrap();
    for line in field.lines().skip(1) {
        assert!(line.ends_with(",0"), "nonzero field row: {line}");
    }
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn configuration_problems_exit_with_code_2() {
    let dir = workdir("cfg");
    // missing file
    let out = bin().arg("solve").arg(dir.join("absent.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));
    // malformed JSON
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = bin().arg("solve").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // unknown key
    let unknown = dir.join("unknown.json");
    let mut v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(write_config(&dir, "0")).unwrap()).unwrap();
    v["surprise"] = serde_json::json!(1);
    std::fs::write(&unknown, v.to_string()).unwrap();
    let out = bin().arg("solve").arg(&unknown).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn numerical_problems_exit_with_code_3() {
    let dir = workdir("numeric");
    let config = dir.join("run.json");
    let text = serde_json::json!({
        "alpha": 0.5,
        "beta": 1.0,
        "s": 1,
        "K": "y - 0.5",
        "p": ["0"],
        "phi": "0",
        "grid": {"ny": 60, "nx": 64},
        "modes": 3,
        "tolerance": 1e-3,
        "output": dir.join("out").display().to_string()
    })
    .to_string();
    std::fs::write(&config, text).unwrap();
    let out = bin().arg("solve").arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("positive"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn eigs_prints_the_spectrum_with_an_override() {
    let dir = workdir("eigs");
    let config = write_config(&dir, "sin(pi*y)");
    let out = run_ok(bin().arg("eigs").arg(&config).arg("--modes").arg("4"));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "n,lambda,near_degenerate");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("1,9.86"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn ks_prints_the_value_and_rejects_bad_parameters() {
    let out = run_ok(bin().args(["ks", "--alpha", "0.5", "--m", "2", "--l", "1", "--z=-5"]));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let value: f64 = stdout.trim().parse().unwrap();
    assert!((value - 0.12533708631263858).abs() < 1e-8);
    let out = bin()
        .args(["ks", "--alpha", "1.5", "--z=-1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin()
        .args(["ks", "--alpha", "0.5", "--z", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_passes_and_writes_a_report() {
    let dir = workdir("verify");
    let config = write_config(&dir, "sin(pi*y)");
    let out = run_ok(bin().arg("verify").arg(&config));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("equation-residual: pass"));
    assert!(!stdout.contains("FAIL"));
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.join("out_verification.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["passed"], true);
    assert!(report["checks"].as_array().unwrap().len() >= 8);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn selftest_reports_success() {
    let out = run_ok(bin().arg("selftest"));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.trim_end().ends_with("selftest passed"));
    assert!(stdout.matches("ok: ").count() >= 5);
}
