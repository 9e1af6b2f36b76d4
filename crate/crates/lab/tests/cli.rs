use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ergodic_lab::{catalog, ExperimentConfig, LabError};

fn ergolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ergolab")).args(args).output().expect("spawn ergolab")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn catalog_covers_every_criterion_once() {
    let mut crit: Vec<u8> = catalog().iter().map(|e| e.criterion).collect();
    crit.sort();
    assert_eq!(crit, (1..=15).collect::<Vec<u8>>());
    let list = ergolab(&["list"]);
    assert!(list.status.success());
    assert_eq!(String::from_utf8(list.stdout).unwrap().lines().count(), catalog().len());
}

#[test]
fn describe_lists_thresholds_for_the_model() {
    let out = ergolab(&["describe", "entropy-dimension", "--model", "rwrs"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("rwrs_slope_low") && text.contains("rwrs_slope_high"));
    assert!(!text.contains("iid_slope_min"));
    assert!(!text.contains("ordering_min"));
}

#[test]
fn rerun_writes_identical_csv() {
    let args = |d: &Path| {
        vec!["run".into(), "neptune".into(), "--seed".into(), "11".into(), "--n".into(), "400".into(), "--trajectories".into(), "300".into(), "--param".into(), "reference_samples=200".into(), "--param".into(), "reference_steps=10000".into(), "--param".into(), "scaling_trajectories=20".into(), "--out".into(), d.to_string_lossy().into_owned()]
    };
    let a = scratch("det_a");
    let b = scratch("det_b");
    let run = |d: &Path, threads: &str| {
        let argv: Vec<String> = args(d);
        Command::new(env!("CARGO_BIN_EXE_ergolab")).args(&argv).env("RAYON_NUM_THREADS", threads).output().unwrap()
    };
    let ra = run(&a, "1");
    let rb = run(&b, "3");
    assert!(ra.status.code().is_some_and(|c| c <= 1), "{}", String::from_utf8_lossy(&ra.stderr));
    assert_eq!(ra.status.code(), rb.status.code());
    let (fa, fb) = (csv_files(&a), csv_files(&b));
    assert!(!fa.is_empty());
    assert_eq!(fa, fb);
    for (_, bytes) in &fa {
        assert!(!bytes.contains(&b'\r'));
        assert!(bytes.ends_with(b"\n"));
    }
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 11);
    assert!(summary["runtime_seconds"].is_number());
}

#[test]
fn every_threshold_gets_a_verdict() {
    let out = ergolab(&["run", "entropy-finiteness", "--seed", "3", "--trajectories", "2000"]);
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let keys: Vec<&str> = summary["verdicts"].as_array().unwrap().iter().map(|v| v["threshold"].as_str().unwrap()).collect();
    let entry = catalog::find("entropy-finiteness").unwrap();
    let expected: Vec<&str> = entry.thresholds_for("all").map(|t| t.key).collect();
    assert_eq!(keys, expected);
    assert_eq!(summary["pass"].as_bool().unwrap(), out.status.success());
}

#[test]
fn failed_verdict_exits_one() {
    let out = ergolab(&["run", "tower-combinatorics", "--seed", "1", "--threshold", "mismatches_max=-1"]);
    assert_eq!(out.status.code(), Some(1));
    let ok = ergolab(&["run", "tower-combinatorics", "--seed", "1"]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn config_errors_exit_two() {
    let dir = scratch("config");
    let bad_key = dir.join("bad_key.json");
    fs::write(&bad_key, r#"{"experiment": "kac", "sed": 7}"#).unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["run", "--config", bad_key.to_str().unwrap()],
        vec!["run", "kac"],
        vec!["run", "nonesuch", "--seed", "1"],
        vec!["run", "kac", "--seed", "1", "--n", "10"],
        vec!["run", "darling-kac", "--seed", "1", "--n", "1.5"],
        vec!["run", "darling-kac", "--seed", "1", "--model", "iid"],
        vec!["run", "darling-kac", "--seed", "1", "--param", "bogus=1"],
        vec!["run", "darling-kac", "--seed", "1", "--param", "c=-4"],
        vec!["run", "kac", "--seed", "1", "--model", "srw1", "--threshold", "shift_relative_error_max=1"],
        vec!["run", "kac", "--seed", "1", "--threshold", "nope=1"],
        vec!["run", "kac", "--seed", "-1"],
    ];
    for args in cases {
        assert_eq!(ergolab(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn flags_override_the_config_file() {
    let dir = scratch("layering");
    let file = dir.join("cfg.json");
    fs::write(&file, r#"{"experiment": "interval-union", "seed": 5, "trajectories": 100, "params": {"max_len": 10}}"#).unwrap();
    let out = ergolab(&["run", "--config", file.to_str().unwrap(), "--trajectories", "50"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["config"]["trajectories"], 50.0);
    assert_eq!(summary["config"]["seed"], 5);
    assert_eq!(summary["config"]["params"]["max_len"], 10.0);
}

#[test]
fn resolve_reports_config_errors() {
    let cfg = ExperimentConfig { experiment: Some("kac".into()), ..Default::default() };
    assert!(matches!(cfg.resolve(), Err(LabError::Config(_))));
    assert!(ExperimentConfig::from_json(r#"{"seed": 1, "extra": 2}"#).is_err());
}
