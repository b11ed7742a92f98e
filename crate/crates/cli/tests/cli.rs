use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn childsense(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_childsense"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = childsense(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn small_dataset(dir: &Path) -> String {
    let cfg = dir.join("gen.json");
    fs::write(
        &cfg,
        r#"{"sessions_per_class": 5, "gestures_per_session": 24, "session_duration_s": 30.0}"#,
    )
    .unwrap();
    let out = dir.join("data");
    ok(&[
        "synth",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    out.join("manifest.json").to_str().unwrap().to_string()
}

#[test]
fn end_to_end_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let manifest = small_dataset(d);
    let echoed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("data/gen_config.json")).unwrap()).unwrap();
    assert_eq!(echoed["sessions_per_class"], 5);

    let csv = d.join("stroke.csv");
    ok(&[
        "extract",
        "--data",
        &manifest,
        "--kind",
        "stroke",
        "--out",
        csv.to_str().unwrap(),
    ]);
    let header = fs::read_to_string(&csv)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string();
    assert!(header.starts_with("straight_to_trajectory_length_ratio,"));
    assert!(header.ends_with(",label,group"));

    let model = d.join("model.json");
    ok(&[
        "train",
        "--features",
        csv.to_str().unwrap(),
        "--classifier",
        "tree",
        "--out",
        model.to_str().unwrap(),
    ]);
    let out = ok(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--features",
        csv.to_str().unwrap(),
        "--k",
        "4",
    ]);
    let first: serde_json::Value = serde_json::from_str(
        String::from_utf8(out.stdout)
            .unwrap()
            .lines()
            .next()
            .unwrap(),
    )
    .unwrap();
    assert_eq!(first["k"], 4);
    assert!(first["fused"].as_f64().unwrap() >= 0.0);

    let report = d.join("report.json");
    let roc = d.join("roc");
    ok(&[
        "eval",
        "--data",
        &manifest,
        "--classifier",
        "tree",
        "--folds",
        "3",
        "--k-list",
        "1,4",
        "--out",
        report.to_str().unwrap(),
        "--roc-dir",
        roc.to_str().unwrap(),
    ]);
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["config"]["folds"], 3);
    assert_eq!(r["curve"].as_array().unwrap().len(), 2);
    assert!(r["data"].as_str().unwrap().ends_with("manifest.json"));
    assert!(roc.join("roc_k1.csv").exists());
}

#[test]
fn unknown_flag_is_usage_error() {
    let out = childsense(&["eval", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(childsense(&["--help"]).status.code(), Some(0));
}

#[test]
fn invalid_config_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = small_dataset(tmp.path());
    let out = childsense(&[
        "eval",
        "--data",
        &manifest,
        "--folds",
        "1",
        "--out",
        "unused.json",
    ]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn single_class_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = small_dataset(tmp.path());
    let entries: Vec<serde_json::Value> =
        match serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap() {
            serde_json::Value::Array(v) => v,
            serde_json::Value::Object(o) => o["sessions"].as_array().unwrap().clone(),
            _ => unreachable!(),
        };
    let children: Vec<_> = entries
        .into_iter()
        .filter(|e| e["label"] == "child")
        .collect();
    assert!(!children.is_empty());
    fs::write(&manifest, serde_json::to_string(&children).unwrap()).unwrap();
    let report = tmp.path().join("report.json");
    let out = childsense(&[
        "eval",
        "--data",
        &manifest,
        "--folds",
        "3",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("single class"));
    assert!(!report.exists());
}

#[test]
fn thread_count_does_not_change_output() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = small_dataset(tmp.path());
    let run = |threads: &str| {
        let report = tmp.path().join(format!("report_{threads}.json"));
        ok(&[
            "--threads",
            threads,
            "eval",
            "--data",
            &manifest,
            "--approach",
            "sensor",
            "--classifier",
            "tree",
            "--folds",
            "3",
            "--k-list",
            "1,2",
            "--out",
            report.to_str().unwrap(),
        ]);
        fs::read(report).unwrap()
    };
    assert_eq!(run("1"), run("4"));
}
