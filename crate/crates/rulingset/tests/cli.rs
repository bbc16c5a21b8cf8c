use std::path::Path;
use std::process::Command;

use rulingset::formats::{ConfigJson, StateSpaceJson};
use rulingset::trace::{parse_jsonl, TraceLine};
use rulingset_core::{Configuration, Params};
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_rulingset");

fn run(args: &[&str]) -> (u8, Value, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = rulingset::cli::run(std::iter::once("rulingset").chain(args.iter().copied()), &mut out, &mut err);
    let text = String::from_utf8(out).unwrap();
    let first = text.lines().next().map(|l| serde_json::from_str(l).unwrap()).unwrap_or(Value::Null);
    (code, first, String::from_utf8(err).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn p5(dir: &Path) -> String {
    write(dir, "path5.txt", "# P5\n0 1\n1 2\n2 3\n3 4\n")
}

#[test]
fn simulate_reaches_a_ruling_set() {
    let dir = tempfile::tempdir().unwrap();
    let g = p5(dir.path());
    let (code, v, _) =
        run(&["simulate", "--graph", &g, "--k", "3", "--daemon", "subset-random", "--p", "0.5", "--seed", "1", "--max-steps", "100000"]);
    assert_eq!(code, 0);
    assert_eq!(v["termination"], "legitimate_reached");
    assert_eq!(v["legitimate"], true);
    assert_eq!(v["ruling_set"], true);
}

#[test]
fn simulate_recovers_from_injected_faults() {
    let (code, v, _) = run(&[
        "simulate", "--gen", "random", "--n", "40", "--max-degree", "4", "--k", "4", "--seed", "3", "--inject", "500:10",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["legitimate"], true);
    assert_eq!(v["faults"][0][1], 10);
}

#[test]
fn traces_are_jsonl_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let g = p5(dir.path());
    let trace = dir.path().join("out.jsonl").display().to_string();
    let (code, v, _) = run(&["simulate", "--graph", &g, "--k", "3", "--seed", "4", "--inject", "3:2", "--trace", &trace]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&trace).unwrap();
    for line in text.lines() {
        serde_json::from_str::<Value>(line).unwrap();
    }
    let lines = parse_jsonl(&text).unwrap();
    assert!(matches!(lines.first(), Some(TraceLine::Init { .. })));
    assert!(lines.iter().any(|l| matches!(l, TraceLine::Fault { .. })));
    assert_eq!(lines.last().unwrap().hash(), v["hash"].as_str().unwrap());

    let (code, r, _) = run(&["replay", "--graph", &g, "--trace", &trace]);
    assert_eq!(code, 0);
    assert_eq!(r["hash"], v["hash"]);

    // Drop one step: the following hashes no longer chain.
    let i = text.lines().position(|l| l.contains("\"step\"")).unwrap();
    let cut: Vec<&str> = text.lines().enumerate().filter(|&(j, _)| j != i).map(|(_, l)| l).collect();
    let bad = write(dir.path(), "bad.jsonl", &cut.join("\n"));
    let (code, _, err) = run(&["replay", "--graph", &g, "--trace", &bad]);
    assert_eq!(code, 1, "{err}");
}

fn state(dir: &Path, d: &[u32]) -> String {
    let cfg = Configuration::from_distances(Params::new(3).unwrap(), d);
    write(dir, "state.json", &serde_json::to_string(&ConfigJson::from_config(&cfg)).unwrap())
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let g = p5(dir.path());
    for (d, code) in [(&[0, 1, 2, 1, 0][..], 0), (&[0, 1, 1, 0, 1], 0), (&[0, 0, 1, 2, 2], 1)] {
        let s = state(dir.path(), d);
        let (got, v, _) = run(&["check", "--graph", &g, "--state", &s]);
        assert_eq!(got, code, "{d:?}");
        assert_eq!(v["legitimate"], code == 0);
    }
    let (_, v, _) = run(&["check", "--graph", &g, "--state", &state(dir.path(), &[0, 0, 1, 2, 2])]);
    assert_eq!(v["distance_violations"][0], serde_json::json!([0, 1, 1]));
    let s = state(dir.path(), &[0, 1, 2]);
    assert_eq!(run(&["check", "--graph", &g, "--state", &s]).0, 2);
}

#[test]
fn modelcheck_verifies_and_reports_budget() {
    let (code, v, _) = run(&["modelcheck", "--gen", "path", "--n", "5", "--k", "3"]);
    assert_eq!(code, 0);
    let closure: StateSpaceJson = serde_json::from_value(v["closure"].clone()).unwrap();
    assert_eq!(closure.closure_verified, Some(true));
    assert_eq!(closure.examined, 7776);
    assert_eq!(v["reachability"]["reachability_verified"], true);

    let (code, _, err) = run(&["modelcheck", "--gen", "path", "--n", "5", "--k", "3", "--budget", "1000"]);
    assert_eq!(code, 3, "{err}");
    let (code, v, _) = run(&["modelcheck", "--gen", "cycle", "--n", "4", "--k", "3", "--check", "reachability", "--from", "sample:20:1"]);
    assert_eq!(code, 0);
    assert_eq!(v["reachability"]["examined"], 20);
}

#[test]
fn color_reports_and_writes_coloring() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("colors.json").display().to_string();
    let (code, v, _) = run(&["color", "--gen", "path", "--n", "10", "--k", "3", "--K", "2", "--layers", "9", "--out", &out]);
    assert_eq!(code, 0);
    assert_eq!(v["check"]["valid"], true);
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(written, v["coloring"]);
    assert_eq!(written["uncolored"], serde_json::json!([]));

    let (code, v, _) = run(&["color", "--gen", "path", "--n", "10", "--k", "3", "--layers", "1"]);
    assert_eq!(code, 1);
    assert!(!v["check"]["uncolored"].as_array().unwrap().is_empty());
}

#[test]
fn solve_problems() {
    for problem in ["mis", "coloring"] {
        let (code, v, _) = run(&["solve", "--gen", "path", "--n", "10", "--problem", problem, "--seed", "2"]);
        assert_eq!(code, 0, "{problem}");
        assert_eq!(v["problem"], problem);
        assert_eq!(v["valid"], true);
        assert_eq!(v["outputs"].as_array().unwrap().len(), 10);
    }
}

#[test]
fn config_files_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "exp.conf", "# experiment\ngen = path\nn = 7\nk = 3\nseed = 5\nmax-steps = 0\n");
    let (code, v, _) = run(&["simulate", "--config", &cfg]);
    assert_eq!(code, 3);
    assert_eq!(v["termination"], "step_cap");
    let (code, v, _) = run(&["simulate", "--config", &cfg, "--max-steps", "100000"]);
    assert_eq!(code, 0);
    assert_eq!(v["seed"], 5);
    let bad = write(dir.path(), "bad.conf", "colour = red\n");
    assert_eq!(run(&["simulate", "--config", &bad]).0, 2);
}

#[test]
fn usage_errors() {
    assert_eq!(run(&["simulate", "--k", "3"]).0, 2);
    assert_eq!(run(&["simulate", "--gen", "path", "--n", "4", "--k", "2"]).0, 2);
    assert_eq!(run(&["simulate", "--gen", "path", "--n", "4", "--k", "3", "--daemon", "lazy"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["check", "--gen", "path", "--n", "3", "--state", "/nonexistent.json"]).0, 2);
}

#[test]
fn jobs_do_not_change_results() {
    let args = ["simulate", "--gen", "random", "--n", "50", "--max-degree", "4", "--k", "5", "--runs", "6"];
    let out = |jobs: &str| {
        let o = Command::new(BIN).args(args).args(["--jobs", jobs]).output().unwrap();
        assert_eq!(o.status.code(), Some(0));
        o.stdout
    };
    assert_eq!(out("1"), out("3"));
}

#[test]
fn generated_graphs_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("g.json").display().to_string();
    let (code, _, _) = run(&["generate", "--gen", "grid", "--rows", "3", "--cols", "3", "--format", "json", "--out", &json]);
    assert_eq!(code, 0);
    let (code, v, _) = run(&["simulate", "--graph", &json, "--k", "3", "--seed", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["legitimate"], true);
}

#[test]
fn binary_logs_to_stderr_only() {
    let o = Command::new(BIN)
        .args(["simulate", "--gen", "path", "--n", "6", "--k", "3"])
        .env("RULINGSET_LOG", "info")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 1);
    serde_json::from_str::<Value>(stdout.trim()).unwrap();
    assert!(String::from_utf8(o.stderr).unwrap().contains("legitimate_reached"));
}
