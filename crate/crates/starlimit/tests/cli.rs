use std::path::Path;
use std::process::{Command, Output};

use starlimit::config::RunConfig;

const BIN: &str = env!("CARGO_BIN_EXE_starlimit");

fn fixture(c: &str, extra: &str) -> String {
    format!(
        r#"{{"k": 3, "c": {c}, "grid": {{"L": 20, "h": 0.001953125}}, {extra}
            "test_function": {{"family": "bump", "base": 1, "heights": [1, -1, 0.5], "width": 1}}}}"#
    )
}

fn run(dir: &Path, sub: &str, config: &str, flags: &[&str]) -> Output {
    let cfg = dir.join(format!("{sub}.json"));
    std::fs::write(&cfg, config).unwrap();
    Command::new(BIN)
        .arg(sub)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(flags)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn markov_uniform_rates() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "markov", &fixture("[1, 1, 1]", ""), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("out/markov.csv"));
    assert_eq!(rows[0], ["k", "omega", "M", "M0", "alpha_1", "alpha_2", "alpha_3"]);
    let omega: f64 = rows[1][1].parse().unwrap();
    let m: f64 = rows[1][2].parse().unwrap();
    assert!((omega - 1.5).abs() <= 1e-10, "{omega}");
    assert!((m - 9.0).abs() <= 1e-9, "{m}");
    assert!(dir.path().join("out/markov.manifest.json").exists());
}

#[test]
fn zero_b_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "resolvent", &fixture("[1, 2, 4]", r#""b": [1, 0, 1], "lambdas": [1],"#), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("b[1]"), "{}", stderr(&o));
}

#[test]
fn bad_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "markov", "{\"k\": 3", &[]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(dir.path(), "markov", &fixture("[1, 2, 4]", r#""unknown": 1,"#), &[]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(dir.path(), "resolvent", &fixture("[1, 2, 4]", ""), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("lambdas"), "{}", stderr(&o));
    let o = run(dir.path(), "bogus", &fixture("[1, 2, 4]", ""), &[]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(dir.path(), "markov", &fixture("[1, 2, 4]", ""), &["--threads", "zero"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn numerical_guards_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    // √λ h > 1 on the resolvent kernel.
    let o = run(dir.path(), "resolvent", &fixture("[1, 2, 4]", r#""lambdas": [1e6],"#), &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    // A cosine time beyond the extension window.
    let o = run(dir.path(), "cosine", &fixture("[1, 2, 4]", r#""times": [5], "T_max": 4,"#), &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn reruns_are_byte_identical_and_manifest_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("[1, 2, 4]", r#""lambdas": [1, 4], "epsilons": [1, 0.1, 0.01],"#);
    let a = run(dir.path(), "converge-resolvent", &cfg, &["--threads", "1"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let out = dir.path().join("out");
    let first = std::fs::read(out.join("converge_resolvent.csv")).unwrap();
    let b = run(dir.path(), "converge-resolvent", &cfg, &["--threads", "3"]);
    assert_eq!(b.status.code(), Some(0));
    assert_eq!(first, std::fs::read(out.join("converge_resolvent.csv")).unwrap());

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("converge-resolvent.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "converge-resolvent");
    let echoed = serde_json::to_string(&manifest["config"]).unwrap();
    let parsed = RunConfig::from_json(&echoed).unwrap();
    assert_eq!(parsed, RunConfig::from_json(&cfg).unwrap());
    let hash = manifest["outputs"][0]["sha256"].as_str().unwrap();
    assert_eq!(hash, starlimit::output::sha256_hex(&first));

    let again = run(dir.path(), "converge-resolvent", &echoed, &[]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(first, std::fs::read(out.join("converge_resolvent.csv")).unwrap());
}

#[test]
fn converge_resolvent_error_column_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("[1, 2, 4]", r#""lambdas": [1], "epsilons": [1, 0.1, 0.01, 0.001, 0.0001],"#);
    let o = run(dir.path(), "converge-resolvent", &cfg, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("out/converge_resolvent.csv"));
    let col = rows[0].iter().position(|h| h == "sup_error").unwrap();
    let errs: Vec<f64> = rows[1..].iter().map(|r| r[col].parse().unwrap()).collect();
    assert_eq!(errs.len(), 5);
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        r#"{{"k": 2, "c": [1, 1], "grid": {{"L": 24, "h": 0.0625}}, "times": [0.25],
            "mc": {{"h": 0.0625, "trajectories": 2000, "master_seed": 5, "start_x": 0.5}},
            "test_function": {{"family": "exp-decay", "rate": 1}}}}"#
    );
    let read = |flags: &[&str]| {
        let o = run(dir.path(), "mc", &cfg, flags);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/mc.manifest.json")).unwrap()).unwrap();
        (
            std::fs::read_to_string(dir.path().join("out/mc.csv")).unwrap(),
            manifest["config"]["mc"]["master_seed"].as_u64().unwrap(),
        )
    };
    let (base, seed) = read(&[]);
    assert_eq!(seed, 5);
    let (same, _) = read(&["--seed", "5"]);
    assert_eq!(base, same);
    let (other, seed) = read(&["--seed", "6"]);
    assert_eq!(seed, 6);
    assert_ne!(base, other);
}

#[test]
fn help_exits_zero() {
    let o = Command::new(BIN).arg("--help").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("--config"));
}
