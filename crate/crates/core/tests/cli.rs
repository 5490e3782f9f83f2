use std::path::Path;
use std::process::{Command, Output};

use lfr_core::cli::reports_from_csv;

fn lfr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lfr")).args(args).env_remove("LFR_SEED").output().expect("spawn lfr")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_then_run_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("p.txt");
    for kind in ["diag", "cmv", "hess"] {
        let out = lfr(&["gen", "--kind", kind, "--n", "16", "--k", "2", "--seed", "4", "--out", path_str(&file)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let run = lfr(&["run", "--input", path_str(&file)]);
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
        let from_file = reports_from_csv(&String::from_utf8(run.stdout).unwrap()).unwrap();
        let direct = lfr(&["run", "--kind", kind, "--n", "16", "--k", "2", "--seed", "4"]);
        let direct = reports_from_csv(&String::from_utf8(direct.stdout).unwrap()).unwrap();
        assert_eq!(from_file.len(), 1);
        assert_eq!(from_file[0].rotations, direct[0].rotations);
        assert!((from_file[0].norm_a - direct[0].norm_a).abs() <= 1e-12 * direct[0].norm_a);
        assert!(from_file[0].eps_b <= 1e-15);
    }
}

#[test]
fn gen_is_deterministic() {
    let a = lfr(&["gen", "--kind", "hess", "--n", "10", "--k", "2", "--seed", "99"]);
    let b = lfr(&["gen", "--kind", "hess", "--n", "10", "--k", "2", "--seed", "99"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = lfr(&["gen", "--kind", "hess", "--n", "10", "--k", "2", "--seed", "100"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn seed_comes_from_environment() {
    let with_env = Command::new(env!("CARGO_BIN_EXE_lfr"))
        .args(["gen", "--n", "8", "--k", "1"])
        .env("LFR_SEED", "31")
        .output()
        .unwrap();
    let with_flag = lfr(&["gen", "--n", "8", "--k", "1", "--seed", "31"]);
    assert_eq!(with_env.stdout, with_flag.stdout);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(lfr(&["run", "--n", "8", "--k", "5"]).status.code(), Some(2));
    assert_eq!(lfr(&["run", "--scale", "0.5"]).status.code(), Some(2));
    assert_eq!(lfr(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(lfr(&["run", "--n", "200", "--k", "2", "--verify"]).status.code(), Some(2));
}

#[test]
fn io_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.txt");
    assert_eq!(lfr(&["run", "--input", path_str(&missing)]).status.code(), Some(3));
    let bad_out = dir.path().join("no/such/dir/out.csv");
    assert_eq!(lfr(&["gen", "--out", path_str(&bad_out)]).status.code(), Some(3));
}

#[test]
fn json_report_has_metric_fields() {
    let out = lfr(&["run", "--kind", "cmv", "--n", "12", "--k", "3", "--reps", "2", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for key in ["n", "k", "normA", "eps_P", "eps_B", "eps_H", "time_ms", "rotations"] {
        assert!(rows[0].get(key).is_some(), "missing {key}");
    }
}

#[test]
fn verify_reports_eigenvalue_distance() {
    let out = lfr(&["run", "--kind", "diag", "--n", "24", "--k", "3", "--verify"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("eigenvalue distance"));
}
