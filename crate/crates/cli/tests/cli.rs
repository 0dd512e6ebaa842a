use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parachern")).args(args).env("PARACHERN_LOG", "error").output().expect("binary runs")
}

fn run_to(dir: &Path, command: &str, input: &Path, extra: &[&str]) -> (i32, Value) {
    let mut args = vec![command, "--input", input.to_str().unwrap(), "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = run(&args);
    let text = std::fs::read_to_string(dir.join(format!("{command}.json"))).expect("report written");
    (out.status.code().unwrap(), serde_json::from_str(&text).unwrap())
}

fn report_bytes(command: &str, input: &Path, extra: &[&str]) -> Vec<u8> {
    let dir = tempfile::tempdir().unwrap();
    run_to(dir.path(), command, input, extra);
    std::fs::read(dir.path().join(format!("{command}.json"))).unwrap()
}

#[test]
fn pardeg_of_half_half_model() {
    let dir = tempfile::tempdir().unwrap();
    let (code, doc) = run_to(dir.path(), "pardeg", &fixture("half_half.json"), &[]);
    assert_eq!(code, 0);
    assert_eq!(doc["report"]["parDegree"], "2");
    assert_eq!(doc["tool"], "parachern");
    assert_eq!(doc["seed"], 24301);
    assert_eq!(doc["configHash"].as_str().unwrap().len(), 64);
}

#[test]
fn ops_on_two_models_passes_every_identity() {
    let three = fixture("three_points.json");
    let out = run(&["ops", "--input", three.to_str().unwrap(), "--input", three.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["pass"], true);
}

#[test]
fn ops_rejects_models_over_different_points() {
    let out = run(&["ops", "--input", fixture("half_half.json").to_str().unwrap(), "--input", fixture("three_points.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn weight_out_of_range_is_an_input_error() {
    let out = run(&["pardeg", "--input", fixture("bad_weight.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("3/2"));
}

#[test]
fn malformed_json_names_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\"rank\": 2,\n \"degree\": 1,,\n}").unwrap();
    let out = run(&["pardeg", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("broken.json:2:14"), "{msg}");
}

#[test]
fn missing_file_is_an_input_error() {
    let out = run(&["chern", "--input", "/nonexistent/curvature.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_check_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wrong_expectation.json");
    let text = std::fs::read_to_string(fixture("inadmissible_constant.json")).unwrap().replace("\"expectAdmissible\": false", "\"expectAdmissible\": true");
    std::fs::write(&path, text).unwrap();
    let (code, doc) = run_to(dir.path(), "admissible", &path, &[]);
    assert_eq!(code, 1);
    assert_eq!(doc["pass"], false);
    assert_eq!(doc["report"]["admissible"], false);
}

#[test]
fn solver_failures_are_runtime_errors() {
    let dir = tempfile::tempdir().unwrap();
    let negative = dir.path().join("negative.json");
    std::fs::write(&negative, r#"{"rank": 2, "grid": 16, "builtin": "perturbed", "epsilon": 5.0}"#).unwrap();
    let out = run(&["masolve", "--input", negative.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&["masolve", "--input", fixture("ma_he_rank2.json").to_str().unwrap(), "--tol", "1e-30"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn admissible_round_trip_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let (code, doc) = run_to(dir.path(), "admissible", &fixture("admissible_round_trip.json"), &[]);
    assert_eq!(code, 0);
    assert!(doc["report"]["roundTripDeviation"].as_f64().unwrap() < 1e-10);
    let annuli = std::fs::read_to_string(dir.path().join("admissible_annuli.csv")).unwrap();
    assert!(annuli.lines().count() > 1);
}

#[test]
fn pushforward_of_one_two() {
    let dir = tempfile::tempdir().unwrap();
    let (code, doc) = run_to(dir.path(), "pushforward", &fixture("pushforward_12.json"), &[]);
    assert_eq!(code, 0);
    let r = &doc["report"];
    assert_eq!(r["closedForm"], 0.5);
    assert!((r["quadrature"]["value"].as_f64().unwrap() - 0.5).abs() < 1e-6);
    assert!(r["monteCarlo"]["sigmas"].as_f64().unwrap() < 3.0);
    let series = std::fs::read_to_string(dir.path().join("pushforward_quadrature.csv")).unwrap();
    assert_eq!(series.lines().count(), 4);
}

#[test]
fn masolve_constant_takes_no_iterations() {
    let dir = tempfile::tempdir().unwrap();
    let (code, doc) = run_to(dir.path(), "masolve", &fixture("ma_constant.json"), &[]);
    assert_eq!(code, 0);
    assert_eq!(doc["report"]["diagnostics"]["iterations"], 0);
    assert!(dir.path().join("masolve_newton.csv").exists());
    assert!(dir.path().join("masolve_solution.csv").exists());
}

#[test]
fn chern_of_exact_rank_two_curvature() {
    let out = run(&["chern", "--input", fixture("curvature_rank2.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["report"]["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn same_seed_gives_identical_reports() {
    let input = fixture("pushforward_12.json");
    let a = report_bytes("pushforward", &input, &["--seed", "7"]);
    let b = report_bytes("pushforward", &input, &["--seed", "7"]);
    assert_eq!(a, b);
    let c = report_bytes("pushforward", &input, &["--seed", "8"]);
    assert_ne!(a, c);
}

#[test]
fn worker_count_does_not_change_reports() {
    for (command, name) in [("pushforward", "pushforward_12.json"), ("admissible", "admissible_round_trip.json"), ("masolve", "ma_he_rank2.json")] {
        let one = report_bytes(command, &fixture(name), &["--workers", "1"]);
        let three = report_bytes(command, &fixture(name), &["--workers", "3"]);
        assert_eq!(one, three, "{command}");
    }
}

#[test]
fn all_runs_every_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["all", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("all.json")).unwrap()).unwrap();
    assert_eq!(doc["pass"], true);
    let runs = doc["report"]["runs"].as_object().map(|m| m.len()).or_else(|| doc["report"]["runs"].as_array().map(Vec::len)).unwrap();
    assert!(runs >= 6, "{runs}");
}
