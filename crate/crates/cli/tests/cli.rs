//! End-to-end checks of the `retime` binary: exit codes, the solution
//! document, generation round-trips, and byte-level determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn retime(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_retime"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("retime-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn gen_solve_round_trip_matches_hand_solution() {
    let problem = tmp("simple2.json");
    let out = retime(&["gen", "simple", "2", "-o", problem.to_str().unwrap()]);
    assert!(out.status.success(), "gen failed: {out:?}");

    let solution = tmp("simple2-sol.json");
    let out = retime(&[
        "solve",
        "-i",
        problem.to_str().unwrap(),
        "-o",
        solution.to_str().unwrap(),
        "--verify",
        "--emit-diagnostics",
    ]);
    assert!(out.status.success(), "solve failed: {out:?}");

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&solution).unwrap()).unwrap();
    assert_eq!(doc["status"], "ok");
    assert_eq!(doc["objective"], "minimum_time");
    let x: Vec<f64> = doc["x"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!((x[0] - 0.0).abs() < 1e-12);
    assert!((x[1] - 0.05).abs() < 1e-12);
    assert!((x[2] - 0.075).abs() < 1e-12);
    assert!(doc["verify_max_deviation"].as_f64().unwrap() <= 1e-7);
    assert!(doc["duration"].as_f64().unwrap() > 0.0);
    assert!(doc["diagnostics"]["reach"].as_array().unwrap().len() == 3);
}

#[test]
fn malformed_input_exits_1() {
    let bad = tmp("bad.json");
    std::fs::write(&bad, "{\"delta_s\": 0.25, \"bogus\": true}").unwrap();
    let out = retime(&["solve", "-i", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let missing = tmp("missing.json");
    let out = retime(&["solve", "-i", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn infeasible_problem_exits_2_with_step() {
    let problem = tmp("infeasible.json");
    // x_1 is forced to be at least 0.5 but can reach only 0.05.
    std::fs::write(
        &problem,
        r#"{
  "delta_s": 0.25,
  "steps": [
    {"a": [1.0], "b": [1.0], "c": [0.0], "lo": [null], "hi": [0.1]},
    {"a": [1.0, 0.0], "b": [1.0, 1.0], "c": [0.0, 0.0], "lo": [null, 0.5], "hi": [0.1, null]},
    {"a": [1.0], "b": [1.0], "c": [0.0], "lo": [null], "hi": [0.1]}
  ],
  "boundary": {"x0": [0.0, 0.0], "xN": [0.0, null]}
}"#,
    )
    .unwrap();
    let sol = tmp("infeasible-sol.json");
    let out = retime(&[
        "solve",
        "-i",
        problem.to_str().unwrap(),
        "-o",
        sol.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    assert_eq!(doc["status"], "infeasible");
    assert_eq!(doc["infeasible_step"], 1);
}

#[test]
fn unknown_preset_exits_1() {
    let out = retime(&["gen", "bogus", "10", "-o", tmp("x.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn cable_preset_generates_costed_problem() {
    let problem = tmp("cable.json");
    let out = retime(&["gen", "cable", "64", "-o", problem.to_str().unwrap()]);
    assert!(out.status.success(), "{out:?}");
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&problem).unwrap()).unwrap();
    assert!(doc["costs"].as_array().unwrap().len() == 65);
    assert!(doc["steps"].as_array().unwrap().len() == 65);

    let out = retime(&["solve", "-i", problem.to_str().unwrap(), "-o", tmp("cs.json").to_str().unwrap()]);
    assert!(out.status.success(), "cable solve failed: {out:?}");
}

#[test]
fn kinematic_preset_round_trips() {
    let problem = tmp("kin.json");
    let out = retime(&["gen", "kinematic", "50", "-o", problem.to_str().unwrap()]);
    assert!(out.status.success(), "{out:?}");
    let sol = tmp("kin-sol.json");
    let out = retime(&["solve", "-i", problem.to_str().unwrap(), "-o", sol.to_str().unwrap()]);
    assert!(out.status.success(), "{out:?}");
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    assert_eq!(doc["objective"], "minimum_time");
}

#[test]
fn solve_output_is_byte_stable() {
    let problem = tmp("stable.json");
    retime(&["gen", "simple-quadratic", "40", "-o", problem.to_str().unwrap()]);
    let a = retime(&["solve", "-i", problem.to_str().unwrap()]);
    let b = retime(&["solve", "-i", problem.to_str().unwrap()]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn forced_objective_overrides_costs() {
    let problem = tmp("force.json");
    retime(&["gen", "simple-quadratic", "10", "-o", problem.to_str().unwrap()]);
    let out = retime(&["solve", "-i", problem.to_str().unwrap(), "--objective", "topp"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["objective"], "minimum_time");
    assert!(doc["objective_value"].is_null());
}

#[test]
fn verify_refuses_large_problems() {
    let problem = tmp("large.json");
    retime(&["gen", "simple", "50", "-o", problem.to_str().unwrap()]);
    let out = retime(&["solve", "-i", problem.to_str().unwrap(), "--verify"]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("N <= 30"), "unexpected message: {msg}");
}

#[test]
fn csv_export_has_expected_header() {
    let problem = tmp("csv.json");
    retime(&["gen", "simple", "20", "-o", problem.to_str().unwrap()]);
    let csv = tmp("traj.csv");
    let out = retime(&[
        "solve",
        "-i",
        problem.to_str().unwrap(),
        "-o",
        tmp("csv-sol.json").to_str().unwrap(),
        "--dt",
        "0.05",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,s,sdot,x,u,q_0,qd_0\n"));
    assert!(text.lines().count() > 2);
}

#[test]
fn bench_emits_table_and_validates_reps() {
    let out = retime(&[
        "bench", "--min", "10", "--max", "90", "--growth", "3", "--reps", "2",
        "--objective", "quadratic",
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,objective,time_ns,max_segments,mean_segments"
    );
    let rows: Vec<&str> = lines.collect();
    assert!(rows.len() >= 3, "expected sweep rows, got {rows:?}");
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[1], "quadratic");
        assert!(fields[2].parse::<u128>().unwrap() > 0);
        assert!(fields[3].parse::<usize>().unwrap() >= 1);
    }

    let out = retime(&["bench", "--reps", "0"]);
    assert_eq!(out.status.code(), Some(1));
}
