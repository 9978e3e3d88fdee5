//! Binary-level checks of the `mcfpf` CLI: exit codes, config schema errors
//! before compute, and output files.

use std::process::Command;

fn mcfpf() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mcfpf"))
}

#[test]
fn verify_geodesic_suite_exits_zero() {
    let out = mcfpf().args(["verify", "geodesic"]).output().unwrap();
    assert!(out.status.success(), "stdout: {}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("[PASS]"));
}

#[test]
fn unknown_suite_is_usage_error() {
    let out = mcfpf().args(["verify", "nonsense"]).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown verify suite"), "stderr: {err}");
}

#[test]
fn run_with_zero_horizon_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.toml");
    std::fs::write(
        &config,
        r#"
potential = "unit_well01"
epsilon = 0.0625
scheme = "semi_implicit"
dt = 2e-4
t_end = 0.0

[grid]
d = 1
n = 64
lambda = 1.0

[geometry]
kind = "stripe"
axis = 0
width = 0.5
inside = 1
outside = 0
"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = mcfpf()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("manifest.json").exists());
    assert!(out_dir.join("diagnostics.csv").exists());
    assert!(out_dir.join("final.bin").exists());
}

#[test]
fn bad_config_key_fails_before_compute() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(
        &config,
        r#"
potential = "unit_well01"
epsilon = 0.0625
scheme = "semi_implicit"
dt = 2e-4
t_end = 0.0
not_a_real_key = 1

[grid]
d = 1
n = 64
lambda = 1.0

[geometry]
kind = "stripe"
axis = 0
width = 0.5
inside = 1
outside = 0
"#,
    )
    .unwrap();
    let out = mcfpf().args(["run", "--config"]).arg(&config).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("not_a_real_key"), "stderr: {err}");
}

#[test]
fn geodesics_prints_sigma_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.toml");
    std::fs::write(
        &config,
        r#"
potential = "double_well"
epsilon = 0.0625
scheme = "semi_implicit"
dt = 2e-4
t_end = 0.0

[grid]
d = 1
n = 64
lambda = 1.0

[geometry]
kind = "stripe"
axis = 0
width = 0.5
inside = 1
outside = 0
"#,
    )
    .unwrap();
    let out = mcfpf().args(["geodesics", "--config"]).arg(&config).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("well,sigma_0,sigma_1"));
    // sigma_01 = 2 sqrt(2) / 3 to solver tolerance
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let sigma: f64 = row[2].parse().unwrap();
    assert!((sigma - 0.9428090415820634).abs() < 1e-3);
}
