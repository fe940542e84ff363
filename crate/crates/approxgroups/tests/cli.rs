use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_approxgroups")).args(args).output().unwrap()
}

fn report(args: &[&str]) -> (i32, Value) {
    let out = run(args);
    let doc = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), doc)
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("approxgroups-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn analyze_interval_in_cyclic_group() {
    let (code, doc) = report(&["analyze", "--group", "cyclic:41", "--set", "interval:-10:10"]);
    assert_eq!(code, 0);
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["result"]["approximate_group"]["witness"]["K"], 2);
    assert_eq!(doc["scenario_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn scenario_hash_tracks_the_scenario() {
    let (_, a) = report(&["analyze", "--group", "cyclic:41", "--set", "interval:-10:10"]);
    let (_, b) = report(&["analyze", "--group", "cyclic:41", "--set", "interval:-10:10", "--threads", "1"]);
    let (_, c) = report(&["analyze", "--group", "cyclic:43", "--set", "interval:-10:10"]);
    assert_eq!(a["scenario_hash"], b["scenario_hash"]);
    assert_ne!(a["scenario_hash"], c["scenario_hash"]);
}

#[test]
fn malformed_descriptor_reports_its_column() {
    let out = run(&["analyze", "--group", "cyclic:41", "--set", "interval:a:b"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("column 10"));
}

#[test]
fn inline_json_set() {
    let (code, doc) = report(&["analyze", "--group", "cyclic:7", "--set", "[0,1,6]"]);
    assert_eq!(code, 0);
    assert_eq!(doc["result"]["set_size"], 3);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["analyze"]).status.code(), Some(2));
    assert_eq!(run(&["analyze", "--group", "cyclic:0", "--set", "interval:0:1"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn budget_is_enforced() {
    let out = run(&["analyze", "--group", "lattice:2", "--set", "box:-50:50:-50:50", "--budget-max-set", "1000"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn nilprog_check_heisenberg_box() {
    let (code, doc) = report(&["nilprog", "check", "--example", "heisenberg_box", "--N1", "10", "--N2", "10"]);
    assert_eq!(code, 0);
    assert_eq!(doc["result"]["normal_form_binding"], false);
    assert!(doc["result"]["normal_form"].is_object());
}

#[test]
fn growth_profile_csv() {
    let csv = scratch("profile.csv");
    let out = run(&["growth", "profile", "--group", "lattice:2", "--radius", "20", "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let sizes: Vec<u64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(sizes.len(), 21);
    for (r, s) in sizes.iter().enumerate() {
        let r = r as u64;
        assert_eq!(*s, 2 * r * r + 2 * r + 1);
    }
}

#[test]
fn sanders_certificate_round_trips_through_verify() {
    let path = scratch("sanders.json");
    let p = path.to_str().unwrap();
    let out = run(&["sanders", "--group", "lattice:1", "--set", "interval:-10:10", "--out", p]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(run(&["verify", "--report", p]).status.code(), Some(0));

    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    doc["result"]["certificate"]["S"].as_array_mut().unwrap().push(Value::from(1000));
    let forged = scratch("forged.json");
    std::fs::write(&forged, serde_json::to_string(&doc).unwrap()).unwrap();
    assert_eq!(run(&["verify", "--report", forged.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn analyze_witness_round_trips_through_verify() {
    let path = scratch("analyze.json");
    let p = path.to_str().unwrap();
    run(&["analyze", "--group", "heisenberg", "--set", "heisenberg_box:1", "--out", p]);
    assert_eq!(run(&["verify", "--report", p]).status.code(), Some(0));
}

#[test]
fn local_word_outside_domain_is_undefined() {
    let (code, doc) = report(&["local", "word", "--group", "lattice:1", "--domain", "interval:-1:1", "--word", "[1,-1,-1,1]"]);
    assert_eq!(code, 0);
    assert_eq!(doc["result"]["defined"], false);
}
