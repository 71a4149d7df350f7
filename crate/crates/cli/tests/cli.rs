use std::path::PathBuf;
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn ccwb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccwb")).args(args).output().expect("spawn ccwb")
}

fn run(command: &str, name: &str, extra: &[&str]) -> Output {
    let path = scenario(name);
    let mut args = vec![command, "--scenario", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    ccwb(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn temp_scenario(tag: &str, body: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("ccwb-{}-{tag}.json", std::process::id()));
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn singlet_bell_reaches_tsirelson() {
    let out = run("bell", "singlet_bell.json", &["--format", "record"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let record: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(record["kind"], "bell");
    let beta = record["result"]["beta"].as_f64().unwrap();
    assert!((beta - std::f64::consts::SQRT_2).abs() < 1e-6);
}

#[test]
fn every_bundled_scenario_loads() {
    let cases = [
        ("analyze", "dim9_strong_cc.json", 0),
        ("find-cc", "dim9_strong_cc.json", 0),
        ("find-cc", "dim9_multiple_cc.json", 0),
        ("find-cc", "werner_rank1_meet.json", 1),
        ("bell", "product_bell.json", 0),
        ("sample-bell", "pure_sample_bell.json", 0),
        ("classical-audit", "classical_incomplete.json", 0),
        ("find-cc", "classical_eight_atom.json", 0),
        ("genuine-cc", "genuine_split16.json", 0),
        ("geometry", "weak_cc_worked.json", 0),
    ];
    for (command, name, code) in cases {
        let out = run(command, name, &[]);
        assert_eq!(out.status.code(), Some(code), "{command} {name}: {}{}", stdout(&out), stderr(&out));
    }
}

#[test]
fn rank_one_meet_is_an_honest_negative() {
    let out = run("find-cc", "werner_rank1_meet.json", &["--format", "record"]);
    assert_eq!(out.status.code(), Some(1));
    let record: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(record["outcome"], "infeasible");
}

#[test]
fn records_are_byte_identical_across_runs() {
    let a = run("find-cc", "dim9_multiple_cc.json", &["--format", "record"]);
    let b = run("find-cc", "dim9_multiple_cc.json", &["--format", "record"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn seed_override_is_recorded() {
    let out = run("sample-bell", "pure_sample_bell.json", &["--seed", "9", "--format", "record"]);
    let record: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(record["seed"], 9);
}

#[test]
fn out_flag_writes_the_file() {
    let path = std::env::temp_dir().join(format!("ccwb-{}-out.json", std::process::id()));
    let out = run("analyze", "dim9_strong_cc.json", &["--format", "record", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.ends_with('\n'));
    serde_json::from_str::<serde_json::Value>(&written).unwrap();
    std::fs::remove_file(path).ok();
}

#[test]
fn non_hermitian_state_names_tol_herm() {
    let path = temp_scenario(
        "nonherm",
        r#"{"kind":"quantum","seed":0,"payload":{
            "state":{"matrix":[[[0.5,0.0],[0.3,0.0]],[[0.0,0.0],[0.5,0.0]]]},
            "a":{"diagonal":{"dim":2,"indices":[0]}},
            "b":{"diagonal":{"dim":2,"indices":[1]}}}}"#,
    );
    let out = ccwb(&["analyze", "--scenario", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("tol_herm"), "{}", stderr(&out));
}

#[test]
fn schema_errors_point_at_the_field() {
    let path = temp_scenario("schema", r#"{"kind":"bell","seed":0,"payload":{"dims":[2,2],"restarts":"many"}}"#);
    let out = ccwb(&["bell", "--scenario", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("restarts"), "{}", stderr(&out));
}

#[test]
fn missing_file_is_a_usage_error() {
    let out = ccwb(&["analyze", "--scenario", "/nonexistent/scenario.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mismatched_command_is_a_usage_error() {
    let out = run("geometry", "singlet_bell.json", &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tolerance_override_is_applied() {
    let out = run("analyze", "dim9_strong_cc.json", &["--tol-override", "cc_tol=1e-3", "--format", "record"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let record: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(record["tolerances"]["cc_tol"].as_f64(), Some(1e-3));
    let bad = run("analyze", "dim9_strong_cc.json", &["--tol-override", "no_such_tol=1"]);
    assert_eq!(bad.status.code(), Some(2));
}
