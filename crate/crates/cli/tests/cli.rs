use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ampcap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bound_reports_scalar_constants() {
    let out = run(&["bound", "--A", "1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let text = v.to_string();
    assert!(text.contains("66.98461"), "{text}");
}

#[test]
fn bound_with_slack_power_matches_amplitude_only() {
    let a = run(&["bound", "--A", "2"]);
    let b = run(&["bound", "--A", "2", "--P", "5"]);
    assert_eq!(code(&a), 0);
    assert_eq!(code(&b), 0);
    let (va, vb) = (json(&a), json(&b));
    for key in ["upper", "lower"] {
        assert_eq!(va.get(key), vb.get(key), "{key}");
    }
}

#[test]
fn solve_then_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("solve.json");
    let out = run(&["solve", "--A", "2", "--out", path_str(&file)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(v["support_size"], 3);

    let out = run(&["verify", path_str(&file)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn verify_rejects_suboptimal_input() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("binary.json");
    std::fs::write(&file, r#"{"kind":"scalar","n":1,"points":[-3,3],"probs":[0.5,0.5]}"#).unwrap();
    let out = run(&["verify", path_str(&file), "--A", "3"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn verify_accepts_optimal_bare_input() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("binary.json");
    std::fs::write(&file, r#"{"kind":"scalar","n":1,"points":[-1,1],"probs":[0.5,0.5]}"#).unwrap();
    let out = run(&["verify", path_str(&file), "--A", "1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bad_inputs_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("broken.json");
    std::fs::write(&file, "{ not json").unwrap();
    assert_eq!(code(&run(&["verify", path_str(&file), "--A", "1"])), 2);
    assert_eq!(code(&run(&["solve", "--A", "-1"])), 2);
    assert_eq!(code(&run(&["bound", "--n", "0", "--A", "1"])), 2);
    assert_eq!(code(&run(&["sweep", "--what", "bounds", "--A", "1:2"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn bounds_sweep_csv_has_header_and_rows() {
    let out = run(&["sweep", "--what", "bounds", "--A", "1:10:10"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,A,P,lower,upper,kappa,B");
    assert_eq!(lines.len(), 11);
}

#[test]
fn capacity_sweep_is_nondecreasing() {
    let out = run(&["sweep", "--what", "capacity", "--A", "0.5:2.5:5", "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows = json(&out);
    let caps: Vec<f64> = rows
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["capacity"].as_f64().unwrap())
        .collect();
    assert_eq!(caps.len(), 5);
    assert!(caps.windows(2).all(|w| w[1] >= w[0]), "{caps:?}");
}

#[test]
fn zeros_is_deterministic_for_a_seed() {
    let args = ["zeros", "--A", "3", "--budget", "200", "--seed", "11"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn solve_output_is_byte_identical_across_runs() {
    let args = ["solve", "--A", "3", "--seed", "5"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}
