use std::path::Path;
use std::process::{Command, Output};

fn swssb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swssb")).args(args).output().expect("binary runs")
}

fn run_to(dir: &Path, name: &str, extra: &[&str]) -> (Output, Vec<u8>) {
    let path = dir.join(name);
    let mut args = vec!["run", "r1_decay", "--N", "4", "--r", "2,4", "--samples", "40", "--out", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = swssb(&args);
    let bytes = std::fs::read(&path).unwrap_or_default();
    (out, bytes)
}

#[test]
fn list_names_every_experiment() {
    let out = swssb(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["r1_decay", "indistinguishability", "u1_pipeline", "purity_scaling", "concentration"] {
        assert!(text.contains(name), "{text}");
    }
}

#[test]
fn keyed_runs_are_byte_identical_serial_or_parallel() {
    let dir = tempfile::tempdir().unwrap();
    let (a, first) = run_to(dir.path(), "a.csv", &["--seed", "11"]);
    let (b, second) = run_to(dir.path(), "b.csv", &["--seed", "11", "--workers", "3"]);
    assert!(a.status.success() && b.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert!(!first.is_empty());
    assert_eq!(first, second);
    let (_, other) = run_to(dir.path(), "c.csv", &["--seed", "12"]);
    assert_ne!(first, other);
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"N": 5, "r_grid": [2], "samples": 30, "format": "json"}"#).unwrap();
    let out = swssb(&["run", "r1_decay", "--config", cfg.to_str().unwrap(), "--seed", "3"]);
    assert!(out.status.success());
    let records: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let records = records.as_array().unwrap();
    assert!(!records.is_empty());
    assert!(records.iter().all(|r| r["parameters"].as_str().unwrap().starts_with("N=5")));
    assert!(records.iter().all(|r| r.get("wall_time_ms").is_none()));
}

#[test]
fn timings_add_a_column() {
    let out = swssb(&["run", "r1_decay", "--N", "4", "--r", "2", "--samples", "10", "--timings"]);
    let header = String::from_utf8(out.stdout).unwrap().lines().next().unwrap().to_string();
    assert!(header.ends_with(",wall_time_ms"), "{header}");
}

#[test]
fn failing_check_sets_exit_code_one() {
    // the exact two-copy slope on this grid lies outside the -1 window
    let out = swssb(&["run", "indistinguishability", "--N", "5", "--r", "2,4,8,16"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL"));
}

#[test]
fn invalid_configs_exit_with_two() {
    for args in [
        vec!["run", "r1_decay", "--N", "9"],
        vec!["run", "r1_decay", "--r", "3"],
        vec!["run", "concentration", "--Q", "11"],
    ] {
        let out = swssb(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    assert!(!swssb(&["run", "nope"]).status.success());
    assert!(!swssb(&["run", "r1_decay", "--mode", "gaussian"]).status.success());
}
