use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_soliton-jj"))
        .args(args)
        .env("SOLITON_JJ_OUT_DIR", dir)
        .output()
        .unwrap()
}

fn sidecar(dir: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(dir.join("run.json")).unwrap()).unwrap()
}

#[test]
fn out_of_range_z0_is_a_domain_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["simulate", "--z0", "2.0"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("z0 out of [−1,1]"), "{err}");
    assert!(!tmp.path().join("trajectory.csv").exists());
}

#[test]
fn usage_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(tmp.path(), &["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(tmp.path(), &["simulate"]).status.code(), Some(1));
    assert_eq!(run(tmp.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn empty_result_writes_header_only() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["steady-states", "--omega-ratio", "50"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(tmp.path().join("steady_states.csv")).unwrap();
    assert_eq!(csv, "delta,omega_ratio,branch,z_star,theta_star,stability,residual\r\n");
}

#[test]
fn trajectory_schema_and_sidecar() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["simulate", "--z0", "0.1", "--t-final", "5", "--samples", "11"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("trajectory.csv")).unwrap();
    let lines: Vec<&str> = csv.split("\r\n").filter(|l| !l.is_empty()).collect();
    assert_eq!(lines[0], "tau,z,theta,energy");
    assert_eq!(lines.len(), 12);
    assert!(lines[1].starts_with("0.0000000000000000e0,1.0000000000000001e-1,"));
    let side = sidecar(tmp.path());
    assert_eq!(side["config"]["subcommand"], "simulate");
    assert!(side["artifacts"].as_array().unwrap().len() >= 2);
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "[params]\ndelta = 0.5\nomega_ratio = 0.2\n\n[run]\nmode = \"quadrature\"\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let a = tmp.path().join("a");
    let out = run(&a, &["functionals", "--config", cfg, "--z", "0.1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let side = sidecar(&a);
    assert_eq!(side["config"]["delta"], 0.5);
    assert_eq!(side["config"]["omega_ratio"], 0.2);
    assert_eq!(side["config"]["mode"], "quadrature");

    let b = tmp.path().join("b");
    let out = run(&b, &["functionals", "--config", cfg, "--z", "0.1", "--delta", "0.7"]);
    assert!(out.status.success());
    let side = sidecar(&b);
    assert_eq!(side["config"]["delta"], 0.7);
    assert_eq!(side["config"]["omega_ratio"], 0.2);
}

#[test]
fn unknown_config_key_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "[params]\ndeltaa = 0.5\n").unwrap();
    let out = run(tmp.path(), &["functionals", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let mut seen = Vec::new();
    for d in ["x", "y"] {
        let dir = tmp.path().join(d);
        let out = run(&dir, &["validate-approx", "--random-points", "5", "--seed", "3", "--tol-rel", "0.5"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        seen.push((
            std::fs::read(dir.join("validate_approx_I.csv")).unwrap(),
            std::fs::read(dir.join("validate_approx_J.csv")).unwrap(),
        ));
    }
    assert_eq!(seen[0], seen[1]);
}

#[test]
fn failed_certification_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["validate-approx"]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("FAIL"), "{stdout}");
    assert!(tmp.path().join("validate_approx.json").exists());
}

#[test]
fn noon_without_bias_is_singular() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(tmp.path(), &["metrology", "noon", "--omega-ratio", "0"]).status.code(), Some(1));
    let out = run(tmp.path(), &["metrology", "noon", "--n", "100", "--omega-ratio", "4.2"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&std::fs::read(tmp.path().join("metrology_noon.json")).unwrap()).unwrap();
    assert!(v.is_object());
}

#[test]
fn below_split_cat_has_no_pair() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["metrology", "cat", "--delta", "0.3"]);
    assert_eq!(out.status.code(), Some(1));
}
