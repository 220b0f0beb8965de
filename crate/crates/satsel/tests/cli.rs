//! End-to-end runs of the compiled binary against temporary directories.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn satsel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_satsel"))
        .args(args)
        .output()
        .expect("failed to run the satsel binary")
}

fn assert_ok(out: &Output, what: &str) {
    assert!(
        out.status.success(),
        "{what} failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn path_str(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn full_pipeline_runs_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let data = path_str(tmp.path(), "data");
    let out = satsel(&[
        "synth", "--n", "90", "--k", "6", "--classes", "3", "--separation", "6",
        "--missing-rate", "0.1", "--seed", "11", "--out", &data,
    ]);
    assert_ok(&out, "synth");
    let features = path_str(&tmp.path().join("data"), "features.csv");
    let runtimes = path_str(&tmp.path().join("data"), "runtimes.csv");

    let prep = path_str(tmp.path(), "prep");
    let out = satsel(&[
        "preprocess", "--features", &features, "--runtimes", &runtimes, "--out", &prep,
    ]);
    assert_ok(&out, "preprocess");
    let cleaned = fs::read_to_string(tmp.path().join("prep/cleaned_features.csv")).unwrap();
    assert!(!cleaned.contains(",,"), "cleaned features still have gaps");
    assert!(!cleaned.lines().any(|l| l.ends_with(',')));
    assert!(tmp.path().join("prep/labels.csv").exists());
    assert!(tmp.path().join("prep/preprocess_report.json").exists());
    assert!(tmp.path().join("prep/resolved_config.json").exists());

    let cv = path_str(tmp.path(), "cv");
    let out = satsel(&[
        "cv", "--features", &features, "--runtimes", &runtimes, "--out", &cv,
        "--trees", "15", "--seed", "11",
    ]);
    assert_ok(&out, "cv");
    let metrics: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("cv/metrics.json")).unwrap())
            .unwrap();
    let acc = metrics["acc"].as_f64().unwrap();
    assert!(acc >= 0.6, "cv accuracy {acc} too low for separable data");
    assert_eq!(metrics["n"].as_u64().unwrap(), 90);

    let curve = path_str(tmp.path(), "curve");
    let out = satsel(&[
        "curve", "--features", &features, "--runtimes", &runtimes, "--out", &curve,
        "--trees", "15", "--seed", "11", "--curve-seeds", "1", "--batch-size", "20",
        "--label-budget", "50", "--strategies", "margin,passive",
    ]);
    assert_ok(&out, "curve");
    let curve_csv = fs::read_to_string(tmp.path().join("curve/curve.csv")).unwrap();
    let mut grids: std::collections::BTreeMap<String, Vec<u64>> = Default::default();
    for line in curve_csv.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        grids
            .entry(cells[0].to_string())
            .or_default()
            .push(cells[2].parse().unwrap());
    }
    assert_eq!(grids.len(), 2, "expected two strategies in curve.csv");
    let sizes: Vec<&Vec<u64>> = grids.values().collect();
    assert_eq!(sizes[0], sizes[1], "strategies disagree on the train-size grid");
    assert!(tmp.path().join("curve/query_log_seed11.csv").exists());
}

#[test]
fn extract_skips_malformed_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a.cnf");
    let b = tmp.path().join("b.cnf");
    let bad = tmp.path().join("bad.cnf");
    fs::write(&a, "c sample\np cnf 3 2\n1 -2 0\n2 3 0\n").unwrap();
    fs::write(&b, "p cnf 2 1\n1 2 0\n").unwrap();
    fs::write(&bad, "this is not dimacs\n").unwrap();

    let out_dir = path_str(tmp.path(), "feat");
    let out = satsel(&[
        "extract",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
        bad.to_str().unwrap(),
        "--out",
        &out_dir,
    ]);
    assert_ok(&out, "extract with one malformed file");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("skipping"), "no skip warning in: {stderr}");

    let csv = fs::read_to_string(tmp.path().join("feat/features.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# schema: "));
    assert!(lines.next().unwrap().starts_with("instance,"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2, "expected rows for the two well-formed files");
    assert!(rows[0].starts_with("a,"));
    assert!(rows[1].starts_with("b,"));
}

#[test]
fn unknown_portfolio_is_a_usage_error() {
    let out = satsel(&[
        "cv", "--features", "x.csv", "--runtimes", "y.csv", "--portfolio", "nope",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("available presets"), "stderr: {stderr}");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let args = |out: &str| {
        vec![
            "synth".to_string(), "--n".into(), "60".into(), "--k".into(), "5".into(),
            "--classes".into(), "3".into(), "--missing-rate".into(), "0.1".into(),
            "--seed".into(), "7".into(), "--out".into(), out.to_string(),
        ]
    };
    let d1 = path_str(tmp.path(), "one");
    let d2 = path_str(tmp.path(), "two");
    assert_ok(&satsel(&args(&d1).iter().map(String::as_str).collect::<Vec<_>>()), "synth 1");
    assert_ok(&satsel(&args(&d2).iter().map(String::as_str).collect::<Vec<_>>()), "synth 2");
    for name in ["features.csv", "runtimes.csv", "labels.csv"] {
        let one = fs::read(tmp.path().join("one").join(name)).unwrap();
        let two = fs::read(tmp.path().join("two").join(name)).unwrap();
        assert_eq!(one, two, "{name} differs between identical runs");
    }

    let features = path_str(&tmp.path().join("one"), "features.csv");
    let runtimes = path_str(&tmp.path().join("one"), "runtimes.csv");
    let c1 = path_str(tmp.path(), "cv1");
    let c2 = path_str(tmp.path(), "cv2");
    for c in [&c1, &c2] {
        let out = satsel(&[
            "cv", "--features", &features, "--runtimes", &runtimes, "--out", c,
            "--trees", "10", "--folds", "5", "--seed", "7",
        ]);
        assert_ok(&out, "cv rerun");
    }
    let m1 = fs::read(tmp.path().join("cv1/metrics.json")).unwrap();
    let m2 = fs::read(tmp.path().join("cv2/metrics.json")).unwrap();
    assert_eq!(m1, m2, "metrics.json differs between identical runs");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    fs::write(&cfg, r#"{"trees": 7, "seed": 9}"#).unwrap();
    let out_dir = path_str(tmp.path(), "out");
    let out = satsel(&[
        "synth", "--n", "30", "--k", "4", "--config", cfg.to_str().unwrap(),
        "--seed", "3", "--out", &out_dir,
    ]);
    assert_ok(&out, "synth with config file");
    let resolved: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(tmp.path().join("out/resolved_config.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(resolved["trees"].as_u64().unwrap(), 7, "config-file value lost");
    assert_eq!(resolved["seed"].as_u64().unwrap(), 3, "flag should beat config file");
    assert_eq!(resolved["batch_size"].as_u64().unwrap(), 25, "default lost");
}

#[test]
fn rejects_unknown_config_keys() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    fs::write(&cfg, r#"{"treez": 7}"#).unwrap();
    let out = satsel(&[
        "synth", "--n", "30", "--config", cfg.to_str().unwrap(),
        "--out", &path_str(tmp.path(), "out"),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
