use std::path::Path;
use std::process::{Command, Output};

fn stinet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stinet"))
        .args(args)
        .env_remove("STINET_SEED")
        .output()
        .expect("binary runs")
}

fn tiny<'a>(out: &'a Path, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![
        "--out",
        out.to_str().unwrap(),
        "--set",
        "population=200",
        "--set",
        "steps=48",
        "--reps",
        "2",
    ];
    v.extend_from_slice(extra);
    v
}

#[test]
fn run_writes_series_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["run"];
    args.extend(tiny(dir.path(), &["--seed", "5"]));
    let out = stinet(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let series = std::fs::read_to_string(dir.path().join("series.csv")).unwrap();
    assert_eq!(series.lines().count(), 49);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["master_seed"], 5);
    assert_eq!(manifest["config"]["population"], 200);
}

#[test]
fn sweep_is_identical_across_invocations_and_workers() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut args_a = vec!["sweep", "--preset", "certification-sweep"];
    args_a.extend(tiny(a.path(), &["--workers", "1"]));
    let mut args_b = vec!["sweep", "--preset", "certification-sweep"];
    args_b.extend(tiny(b.path(), &["--workers", "8"]));
    assert!(stinet(&args_a).status.success());
    assert!(stinet(&args_b).status.success());
    for f in ["long.csv", "summary.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
    }
}

#[test]
fn manifest_reproduces_results() {
    let a = tempfile::tempdir().unwrap();
    let mut args = vec!["sweep", "--preset", "adoption-sweep"];
    args.extend(tiny(a.path(), &["--seed", "99"]));
    assert!(stinet(&args).status.success());

    // replay from the manifest's resolved config alone
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.path().join("manifest.json")).unwrap()).unwrap();
    let config: toml::Value = serde_json::from_value(manifest["config"].clone()).unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = b.path().join("replay.toml");
    std::fs::write(&cfg, toml::to_string(&config).unwrap()).unwrap();
    let out = stinet(&[
        "sweep",
        "--preset",
        "adoption-sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        b.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        std::fs::read(a.path().join("long.csv")).unwrap(),
        std::fs::read(b.path().join("long.csv")).unwrap()
    );
}

#[test]
fn summary_matches_long_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["sweep", "--preset", "cap-sweep", "--plot"];
    args.extend(tiny(dir.path(), &[]));
    assert!(stinet(&args).status.success());
    let long = stinet_cli::output::read_long_csv(&dir.path().join("long.csv")).unwrap();
    let mut summary = csv::Reader::from_path(dir.path().join("summary.csv")).unwrap();
    let values: Vec<f64> = long.iter().map(|r| r.sweep_value).fold(Vec::new(), |mut acc, v| {
        if acc.last() != Some(&v) {
            acc.push(v);
        }
        acc
    });
    let recomputed = stinet_cli::output::summarize(&values, &long);
    for (rec, want) in summary.records().zip(&recomputed) {
        let rec = rec.unwrap();
        assert_eq!(rec[0].parse::<f64>().unwrap(), want.sweep_value);
        assert!((rec[1].parse::<f64>().unwrap() - want.mean_e_rt).abs() <= 1e-12);
        assert!((rec[2].parse::<f64>().unwrap() - want.std_e_rt).abs() <= 1e-12);
    }
    assert_eq!(values.len(), 8);
    assert!(dir.path().join("summary.svg").exists());
}

#[test]
fn errors_are_machine_readable() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["run"];
    args.extend(tiny(dir.path(), &["--set", "initial_adoption=1.5"]));
    let out = stinet(&args);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line: serde_json::Value = serde_json::from_str(stderr.lines().last().unwrap()).unwrap();
    assert_eq!(line["status"], "error");
    assert!(line["message"].as_str().unwrap().contains("initial_adoption"));

    let out = stinet(&["sweep", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let out = stinet(&["run", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_out_dir_aborts() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("not-a-dir");
    std::fs::write(&file, "").unwrap();
    let out = stinet(&["sweep", "--preset", "adoption-sweep", "--paper-scale", "--out", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn env_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["run"];
    args.extend(tiny(dir.path(), &[]));
    let out = Command::new(env!("CARGO_BIN_EXE_stinet"))
        .args(&args)
        .env("STINET_SEED", "31")
        .output()
        .unwrap();
    assert!(out.status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["master_seed"], 31);
}
