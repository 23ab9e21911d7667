use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;

fn sharpineq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sharpineq")).args(args).output().expect("binary runs")
}

fn records(out: &Output) -> Vec<Value> {
    let doc: Value = serde_json::from_slice(&out.stdout).expect("JSON on stdout");
    doc["records"].as_array().cloned().unwrap()
}

fn csv_header(text: &str) -> Vec<String> {
    text.lines().nth(1).unwrap().split(',').map(String::from).collect()
}

#[test]
fn single_point_gives_one_record() {
    let out = sharpineq(&["constants", "--n", "2", "--a", "1", "--p", "2"]);
    assert!(out.status.success());
    let recs = records(&out);
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0]["status"], "ok");
    assert_eq!(recs[0]["n_a"], 3.0);
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["manifest"]["command"], "constants");
}

#[test]
fn p_equal_to_n_a_is_a_row_status() {
    let out = sharpineq(&["constants", "--n", "2", "--a", "1", "--p", "2,3"]);
    assert_eq!(out.status.code(), Some(0));
    let recs = records(&out);
    assert_eq!(recs[1]["status"], "parameter-error");
    assert!(recs[1]["value"].is_null());
}

#[test]
fn grid_of_36_points_is_fast_and_canonical() {
    let start = Instant::now();
    let out = sharpineq(&["constants", "--n", "3,1..2", "--a", "2.5,0,0.5,1", "--p", "3,1.5,2"]);
    assert!(start.elapsed().as_secs_f64() < 1.0);
    let recs = records(&out);
    assert_eq!(recs.len(), 36);
    let keys: Vec<(u64, f64, f64)> =
        recs.iter().map(|r| (r["n"].as_u64().unwrap(), r["a"].as_f64().unwrap(), r["p"].as_f64().unwrap())).collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
    assert_eq!(keys, sorted);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(sharpineq(&["constants", "--n", "two"]).status.code(), Some(2));
    assert_eq!(sharpineq(&["verify", "gn", "--alpha", "1"]).status.code(), Some(2));
    assert_eq!(sharpineq(&["verify", "nothing"]).status.code(), Some(2));
    assert_eq!(sharpineq(&["plotdata", "histogram"]).status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_sharpineq"))
        .args(["constants"])
        .env("SHARPINEQ_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    let out = sharpineq(&["verify", "tensor"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(records(&out).iter().all(|r| r["status"] == "pass"));
    // the dimension-reduction grid contains points outside the valid range
    let out = sharpineq(&["verify", "dimred"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(records(&out).iter().any(|r| r["status"] != "pass"));
}

#[test]
fn plotdata_schemas() {
    let out = sharpineq(&["--format", "csv", "plotdata", "tensorization-convergence", "--n", "1", "--a", "0", "--k", "1,3,200"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv_header(&text), ["k", "c_k", "limit", "rel_gap"]);
    // k = 1 is below the threshold k·n_a > p and is skipped
    assert_eq!(text.lines().count(), 4);

    let out = sharpineq(&["--format", "csv", "plotdata", "extremal-profiles", "--alpha", "2", "--samples", "20"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv_header(&text), ["family", "alpha", "r", "h"]);
    assert_eq!(text.lines().count(), 2 + 40);

    let out = sharpineq(&["--format", "csv", "plotdata", "transport-map", "--samples", "10"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv_header(&text), ["r", "psi"]);

    let out = sharpineq(&["plotdata", "deficit-vs-perturbation", "--samples", "5"]);
    let recs = records(&out);
    assert_eq!(recs.len(), 5);
    assert!(recs[2]["deficit"].as_f64().unwrap().abs() < 1e-8, "ε = 0 is the extremal");
    assert!(recs[0]["deficit"].as_f64().unwrap() > 0.0);
}

#[test]
fn transport_reports_map_and_lemma() {
    let out = sharpineq(&["transport", "--samples", "5", "--gamma", "critical,2"]);
    assert!(out.status.success());
    let recs = records(&out);
    assert_eq!(recs.iter().filter(|r| r["kind"] == "psi").count(), 5);
    let lemma: Vec<&Value> = recs.iter().filter(|r| r["kind"] == "lemma").collect();
    assert_eq!(lemma.len(), 2);
    assert!(lemma.iter().all(|r| r["gap"].as_f64().unwrap() >= -1e-8));
    assert!((lemma[0]["gamma"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(sharpineq(&["transport", "--gamma", "0.5"]).status.code(), Some(2));
}

#[test]
fn optimize_reports_a_sound_run() {
    let out = sharpineq(&["optimize", "--budget", "400", "--restarts", "2"]);
    assert!(out.status.success());
    let r = &records(&out)[0];
    assert_eq!(r["status"], "sound");
    assert!(r["best_value"].as_f64().unwrap() <= r["initial_value"].as_f64().unwrap());
}

fn replay(path: &Path) -> Output {
    sharpineq(&["replay", path.to_str().unwrap()])
}

#[test]
fn outputs_replay_bit_identically() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("t.json");
    let csv = dir.path().join("t.csv");
    let args = ["--seed", "17", "transport", "--source", "random:3", "--target", "gaussian:2", "--samples", "8"];
    assert!(sharpineq(&[&args[..], &["--out", json.to_str().unwrap()]].concat()).status.success());
    assert!(sharpineq(&[&["--format", "csv"], &args[..], &["--out", csv.to_str().unwrap()]].concat()).status.success());
    assert!(replay(&json).status.success());
    assert!(replay(&csv).status.success());

    // tampering with a value is detected
    let text = std::fs::read_to_string(&csv).unwrap();
    let last = text.lines().last().unwrap().to_string();
    let tampered = text.replace(&last, &last.replacen('1', "2", 1));
    std::fs::write(&csv, tampered).unwrap();
    assert_eq!(replay(&csv).status.code(), Some(1));
    assert_eq!(replay(&dir.path().join("missing.json")).status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_output() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_sharpineq"))
            .args(["constants", "--n", "1..3", "--a", "0,1", "--p", "1.5,2", "--kind", "sobolev,gn"])
            .env("SHARPINEQ_THREADS", threads)
            .output()
            .unwrap()
    };
    let strip = |o: Output| {
        let mut doc: Value = serde_json::from_slice(&o.stdout).unwrap();
        doc["manifest"].as_object_mut().unwrap().remove("wall_time_s");
        doc
    };
    assert_eq!(strip(run("1")), strip(run("3")));
}
