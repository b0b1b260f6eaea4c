use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dykstra"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn solve_converges_with_fast_forward() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let iterates = dir.path().join("iterates.csv");
    let box_line = data("box_line.json");
    let out = run(&[
        "solve",
        box_line.to_str().unwrap(),
        "--mode",
        "dykstra-ff",
        "--trace-out",
        trace.to_str().unwrap(),
        "--iterates-out",
        iterates.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let report = stdout(&out);
    assert!(report.contains("n_stall = 14, i_stall = 1, skipped cycles = 14"), "{report}");
    assert!(std::fs::read_to_string(&trace).unwrap().starts_with("m,schedule_m,cycle,"));
    assert!(std::fs::read_to_string(&iterates).unwrap().starts_with("x,y\n-4,1.4\n"));
}

#[test]
fn budget_exhaustion_exits_one() {
    let out = run(&["solve", data("box_line.json").to_str().unwrap(), "--max-iter", "30"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"dim\": 2, \"halfspaces\": [").unwrap();
    assert_eq!(run(&["solve", bad.to_str().unwrap()]).status.code(), Some(2));

    std::fs::write(&bad, r#"{"dim": 2, "halfspaces": [{"a": [0.0, 0.0], "b": 1.0}], "x0": [0.0, 0.0]}"#).unwrap();
    assert_eq!(run(&["solve", bad.to_str().unwrap()]).status.code(), Some(2));

    assert_eq!(run(&["solve", "/nonexistent/problem.json"]).status.code(), Some(2));
    assert_eq!(run(&["solve"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn compare_writes_both_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "compare",
        data("box_line.json").to_str().unwrap(),
        "--summary-out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("cycles saved: 14"));
    let plain = std::fs::read_to_string(dir.path().join("data_dykstra_original.csv")).unwrap();
    let ff = std::fs::read_to_string(dir.path().join("data_dykstra_ff.csv")).unwrap();
    assert_eq!(plain.lines().count(), ff.lines().count() + 14);
}

#[test]
fn verify_small_range_and_mutation() {
    let ok = run(&["verify", "--from", "0", "--to", "3"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));

    let bad = run(&["verify", "--from", "0", "--to", "3", "--mutate"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("seed 0:"));

    let empty = run(&["verify", "--from", "4", "--to", "4"]);
    assert_eq!(empty.status.code(), Some(0));
    assert!(stdout(&empty).contains("0 tests run"));
}

#[test]
fn gen_is_deterministic_and_solvable() {
    let a = run(&["gen", "--seed", "5", "--stall"]);
    let b = run(&["gen", "--seed", "5", "--stall"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("p.json");
    let out = run(&["gen", "--seed", "2", "--dim", "4", "--count", "7", "--out", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let solved = run(&["solve", file.to_str().unwrap(), "--mode", "dykstra-ff"]);
    assert_eq!(solved.status.code(), Some(0), "{}", stdout(&solved));
    assert!(stdout(&solved).contains("final error (File)"));
}
