use std::process::{Command, Output};

use closure_core::report::{ClosureReport, FdReport, VerifyReport};
use closure_core::scenarios;

fn closure(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_closure"))
        .args(args)
        .env_remove("CLOSURE_FORMAT")
        .output()
        .unwrap()
}

fn json_report(args: &[&str]) -> (ClosureReport, i32) {
    let mut args = args.to_vec();
    args.extend(["--format", "json"]);
    let out = closure(&args);
    let text = String::from_utf8(out.stdout).unwrap();
    let report = ClosureReport::from_json(&text).unwrap_or_else(|e| panic!("{e}: {text}"));
    assert_eq!(report.to_json().unwrap(), text, "round trip is byte-identical");
    (report, out.status.code().unwrap())
}

#[test]
fn decoupled_step_five_is_closed() {
    let (r, code) = json_report(&["analyze", "--scenario", "builtin:decoupled", "--step", "5"]);
    assert_eq!(code, 0);
    assert_eq!(r.steps[0].measures.info_closure.0, 0.0);
}

#[test]
fn driven_step_one_is_open() {
    let (r, code) = json_report(&["analyze", "--scenario", "builtin:driven", "--step", "1"]);
    assert_eq!(code, 3);
    assert!(r.steps[0].measures.info_closure.0 > 0.1);
}

#[test]
fn copy_with_delta_flags_over_budget() {
    let (r, _) = json_report(&["analyze", "--scenario", "builtin:copy", "--step", "1", "--delta", "0.5"]);
    let d = r.steps[0].delta.unwrap();
    assert!(d.over_budget);
    assert!((d.env_coupling.0 - 1.0).abs() < 1e-12);
    let out = closure(&["analyze", "--scenario", "builtin:copy", "--step", "1", "--delta", "0.5"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning[infeasible_delta]"));
}

#[test]
fn sweep_matches_hand_propagation() {
    let (r, code) = json_report(&["sweep", "--scenario", "builtin:copy", "--steps", "0..3"]);
    // open at step 2, where s' copies the environment
    assert_eq!(code, 3);
    let steps: Vec<usize> = r.steps.iter().map(|s| s.step.0).collect();
    assert_eq!(steps, [0, 1, 2]);
    // step 0: e = 0, s uniform, s' = s
    // step 1: e = s, s uniform, s' = 0
    // step 2: s = 0, e uniform, s' = e
    let coupling: Vec<f64> = r.steps.iter().map(|s| s.measures.env_coupling.0).collect();
    let next_h: Vec<f64> = r.steps.iter().map(|s| s.measures.next_entropy.0).collect();
    let func: Vec<f64> = r.steps.iter().map(|s| s.measures.func_closure.0).collect();
    let info: Vec<f64> = r.steps.iter().map(|s| s.measures.info_closure.0).collect();
    let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12);
    assert!(close(&info, &[0.0, 0.0, 1.0]), "{info:?}");
    assert!(close(&coupling, &[0.0, 1.0, 0.0]), "{coupling:?}");
    assert!(close(&next_h, &[1.0, 0.0, 1.0]), "{next_h:?}");
    assert!(close(&func, &[0.0, 0.0, 1.0]), "{func:?}");
    assert_eq!(r.summary.env_coupling.max.0, 1.0);
}

#[test]
fn decoupled_sweep_is_closed_throughout() {
    let (r, code) = json_report(&["sweep", "--scenario", "builtin:decoupled", "--steps", "0..=10"]);
    assert_eq!(code, 0);
    assert_eq!(r.steps.len(), 11);
    assert!(r.steps.iter().all(|s| s.measures.info_closure.0.abs() < 1e-12));
}

#[test]
fn usage_and_input_errors_exit_one() {
    assert_eq!(closure(&["sweep", "--scenario", "builtin:copy", "--steps", "2..2"]).status.code(), Some(1));
    assert_eq!(closure(&["analyze", "--scenario", "builtin:none"]).status.code(), Some(1));
    assert_eq!(closure(&["analyze", "--scenario", "builtin:copy", "--tolerance", "0"]).status.code(), Some(1));
    assert_eq!(closure(&["bogus"]).status.code(), Some(1));
    assert_eq!(closure(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_scenario_names_the_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let mut value: serde_json::Value = serde_json::from_str(&scenarios::copy().to_json().unwrap()).unwrap();
    value["env_kernel"][1]["next"][0]["outcome"][0] = "7".into();
    std::fs::write(&path, value.to_string()).unwrap();
    let out = closure(&["analyze", "--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("env_kernel[1]"), "{err}");
}

#[test]
fn verify_exit_codes_and_failures() {
    let out = closure(&["verify", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let a: VerifyReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!(a.passed);

    let out = closure(&["verify", "--tolerance", "1e-15", "--format", "json"]);
    assert_eq!(out.status.code(), Some(3));
    let strict: VerifyReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!(!strict.failures.is_empty());
    assert!(!strict.failures[0].name.is_empty());

    let out = closure(&["verify", "--seed", "12345", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let b: VerifyReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_ne!(a.identities, b.identities);
}

#[test]
fn fd_reports_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    std::fs::write(
        &path,
        "mode,load,alarm\nidle,low,off\nidle,high,off\nbusy,low,off\nbusy,high,on\n",
    )
    .unwrap();
    let table = path.to_str().unwrap();
    let out = closure(&["fd", "--table", table, "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let r: FdReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r.minimal_sets[0].members, ["mode", "load"]);
    assert_eq!(closure(&["fd", "--table", table, "--environment", "load"]).status.code(), Some(3));
}

#[test]
fn sample_then_analyze_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("traj.csv");
    let out = closure(&[
        "sample", "--scenario", "builtin:driven", "--count", "5000", "--horizon", "3", "--seed", "2",
        "--output", traj.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let (r, code) = json_report(&[
        "analyze", "--scenario", "builtin:driven", "--trajectories", traj.to_str().unwrap(), "--step", "1",
    ]);
    assert_eq!(code, 3);
    let est = r.estimation.unwrap();
    assert_eq!(est.seed, Some(2));
    assert_eq!(est.sample_size, 5000);
    assert_eq!(r.tolerance.0, 0.01);
    assert!((r.steps[0].measures.info_closure.0 - 1.0).abs() < 0.02);
    // same schema, different scenario: provenance mismatch is a warning
    let out = closure(&["analyze", "--scenario", "builtin:decoupled", "--trajectories", traj.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("fingerprint_mismatch"));
}

#[test]
fn format_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_closure"))
        .args(["analyze", "--scenario", "builtin:copy"])
        .env("CLOSURE_FORMAT", "json")
        .output()
        .unwrap();
    assert!(out.stdout.starts_with(b"{"));
}
