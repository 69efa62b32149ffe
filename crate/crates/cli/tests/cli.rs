use std::path::Path;
use std::process::{Command, Output};

use euler_workbench_cli::strip_timing;
use serde_json::Value;

fn run(args: &[&str], cache: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_euler-workbench"));
    cmd.args(args).args(["--jobs", "2"]);
    match cache {
        Some(dir) => cmd.arg("--cache-dir").arg(dir),
        None => cmd.arg("--no-cache"),
    };
    cmd.output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

#[test]
fn distribution_to_60_passes() {
    let out = run(&["distribution", "--max-conductor", "60"], None);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["schema"], 1);
    assert_eq!(r["summary"]["failed"], 0);
    assert!(r["summary"]["total"].as_u64().unwrap() > 0);
    assert!(r["environment"]["embedding"].as_str().unwrap().contains("2πi/n"));
}

#[test]
fn iwasawa_orders_example_passes() {
    let out = run(&["iwasawa", "--suite", "orders", "--p", "5", "--trials", "10", "--seed", "1"], None);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["summary"]["passed"], 10);
}

#[test]
fn conductor_without_real_field_is_usage_error() {
    let out = run(&["rubin-stark", "--conductor", "4", "--bits", "64"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_arguments_exit_2() {
    assert_eq!(run(&["distribution"], None).status.code(), Some(2));
    assert_eq!(run(&["iwasawa", "--suite", "orders", "--p", "6"], None).status.code(), Some(2));
    assert_eq!(run(&["circular", "--builtin", "phi", "--max-level", "10", "--strict-l", "4"], None).status.code(), Some(2));
}

#[test]
fn failing_check_exits_1() {
    let out = run(&["circular", "--builtin", "delta", "--pi", "3", "--max-level", "15", "--strict-l", "5"], None);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    let failed: Vec<&str> = r["items"].as_array().unwrap().iter().filter(|i| i["passed"] == false).map(|i| i["id"].as_str().unwrap()).collect();
    assert_eq!(failed, ["strict n = 3, ℓ = 5"]);
}

#[test]
fn reports_are_deterministic() {
    let args = ["lattice-lemma", "--trials", "4", "--seed", "9"];
    let a = report(&run(&args, None));
    let b = report(&run(&args, None));
    assert_eq!(strip_timing(&a), strip_timing(&b));
    let args = ["iwasawa", "--suite", "lemma", "--p", "3", "--trials", "6", "--seed", "4"];
    assert_eq!(strip_timing(&report(&run(&args, None))), strip_timing(&report(&run(&args, None))));
}

#[test]
fn cache_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["stickelberger", "--max-conductor", "24", "--T", "7,13"];
    let plain = report(&run(&args, None));
    let cold = report(&run(&args, Some(dir.path())));
    let warm = report(&run(&args, Some(dir.path())));
    assert_eq!(strip_timing(&plain), strip_timing(&cold));
    assert_eq!(strip_timing(&cold), strip_timing(&warm));
    assert!(warm["items"].as_array().unwrap().iter().all(|i| i["timing"]["cache_hit"] == true));
    assert!(cold["items"].as_array().unwrap().iter().all(|i| i["timing"]["cache_hit"] == false));
}

#[test]
fn slice_round_trips_through_scarcity() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("slice.json");
    let out = run(&["slice", "--system", "phi", "--max-conductor", "20", "--sigma", "127", "--half", "--out", path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["scarcity", "--conductor", "13", "--input", path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["scarcity", "--conductor", "40", "--input", path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
}
