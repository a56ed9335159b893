//! End-to-end runs of the `dunklpot` binary: pinned output, CSV schemas,
//! and the exit-code contract (0 ok, 1 flagged, 2 usage).

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dunklpot"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_rank_one(dir: &Path) -> PathBuf {
    let path = dir.join("rank1.cfg");
    std::fs::write(&path, "dim = 1\nroots = 1; -1\nk = 1, 1\n").unwrap();
    path
}

#[test]
fn apply_prints_the_constant_image() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_rank_one(dir.path());
    let out = run(&["apply", "--model", model.to_str().unwrap(), "--poly", "x1^2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "6");
}

#[test]
fn green_matches_the_radial_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_rank_one(dir.path());
    let out = run(&["green", "--model", model.to_str().unwrap(), "--x", "1", "--y", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v: f64 = stdout(&out).trim().parse().unwrap();
    assert!((v - 0.5).abs() < 1e-12, "G(1, 0) = {v}");
}

#[test]
fn missing_model_is_a_usage_error() {
    let out = run(&["apply", "--poly", "x1^2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = run(&["transmogrify"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let out = run(&["verify", "--suite", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn threads_variable_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_rank_one(dir.path());
    let ok = bin()
        .env("DUNKLPOT_THREADS", "1")
        .args(["apply", "--model", model.to_str().unwrap(), "--poly", "x1"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = bin()
        .env("DUNKLPOT_THREADS", "many")
        .args(["apply", "--model", model.to_str().unwrap(), "--poly", "x1"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn exit_cloud_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = run(&[
            "exits",
            "--domain",
            "interval:0.5,1.5",
            "--x",
            "1.0",
            "--paths",
            "300",
            "--seed",
            "7",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let bytes_a = std::fs::read(&a).unwrap();
    let bytes_b = std::fs::read(&b).unwrap();
    assert_eq!(bytes_a, bytes_b);
    let text = String::from_utf8(bytes_a).unwrap();
    assert!(text.starts_with("pathId,x1,exitTime,jumps\n"));
    assert_eq!(text.lines().count(), 301);
    assert!(!text.contains('\r'));
}

#[test]
fn grid_csv_has_the_declared_columns() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_rank_one(dir.path());
    let out_path = dir.path().join("grid.csv");
    let out = run(&[
        "dirichlet-fd",
        "--model",
        model.to_str().unwrap(),
        "--domain",
        "interval:-2,2",
        "--data",
        "poly:x1",
        "--h",
        "0.1",
        "--query",
        "0.5",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("u(0.5)"));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with("x1,u\n"));
    assert!(text.lines().count() > 30);
}

#[test]
fn estimate_csv_has_the_declared_columns() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_rank_one(dir.path());
    let out_path = dir.path().join("mc.csv");
    let out = run(&[
        "dirichlet-mc",
        "--model",
        model.to_str().unwrap(),
        "--domain",
        "interval:-2,2",
        "--data",
        "poly:x1",
        "--paths",
        "500",
        "--seed",
        "42",
        "--query",
        "0.5",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with("x1,mean,stdError,paths\n"));
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn checks_report_through_the_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_rank_one(dir.path());
    let harmonic = run(&[
        "check",
        "harmonic",
        "--model",
        model.to_str().unwrap(),
        "--g",
        "poly:x1",
        "--domain",
        "interval:-3,3",
        "--x",
        "1.0",
        "--r",
        "0.4",
    ]);
    assert_eq!(harmonic.status.code(), Some(0));

    let flagged = run(&[
        "check",
        "minprinciple",
        "--model",
        model.to_str().unwrap(),
        "--f",
        "const:-1",
        "--domain",
        "interval:-2,2",
        "--boundary-tol",
        "1e-3",
    ]);
    assert_eq!(flagged.status.code(), Some(1));
}

#[test]
fn kernel_suite_alias_runs_both_kernel_families() {
    let out = run(&["verify", "--suite", "kernels"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("PASS heat/"));
    assert!(text.contains("PASS green/"));
}

#[test]
fn verify_csv_has_the_declared_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("verify.csv");
    let out = run(&[
        "verify",
        "--suite",
        "operator",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("PASS operator/"));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with("suite,check,passed,measured,threshold\n"));
    assert_eq!(text.lines().count(), 4);
}
