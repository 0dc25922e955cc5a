use std::path::Path;
use std::process::{Command, Output};

use planwatch_core::fixtures::{s3_family_templates, star_schema};
use planwatch_core::planspace::write_workload;

fn planwatch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_planwatch"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

const SCALED: &str = r#"{"source": "scaled", "templates": "templates.jsonl", "count": 60}"#;

fn write_config(dir: &Path, workload: &str) -> String {
    std::fs::write(dir.join("schema.json"), star_schema(1).to_json()).unwrap();
    std::fs::write(dir.join("templates.jsonl"), write_workload(&s3_family_templates())).unwrap();
    let config = format!(
        r#"{{
            "catalog": "schema.json",
            "workload": {workload},
            "model": {{"layers": 1, "heads": 2, "embed_dim": 16, "mlp_hidden": 16, "dropout_rate": 0.0}},
            "train": {{"epochs": 4, "replicas": 1}},
            "stream_window": 15
        }}"#
    );
    let path = dir.join("experiment.json");
    std::fs::write(&path, config).unwrap();
    path.to_str().unwrap().to_string()
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "status {:?}\nstdout {}\nstderr {}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn full_pipeline_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SCALED);
    let out_dir = dir.path().join("run");
    let out = out_dir.to_str().unwrap();
    for cmd in [
        "gen-catalog",
        "gen-workload",
        "build-dataset",
        "train",
        "train-baseline",
        "eval-offline",
        "eval-online",
        "simulate-stream",
        "l1",
    ] {
        ok(&planwatch(&[cmd, "--config", &config, "--out", out, "--seed", "3"]));
    }
    for f in [
        "schema.json",
        "catalog_summary.json",
        "workload.jsonl",
        "domains.json",
        "workload_summary.json",
        "dataset/train.jsonl",
        "dataset/test.jsonl",
        "dataset/queries.jsonl",
        "dataset/meta.json",
        "model.ckpt",
        "train_history.json",
        "baseline_dt.json",
        "report_offline.json",
        "report_offline.txt",
        "report_online.json",
        "report_online.txt",
        "report_stream.json",
        "report_stream.txt",
        "cache.jsonl",
    ] {
        assert!(out_dir.join(f).exists(), "missing {f}");
    }
    let offline = std::fs::read_to_string(out_dir.join("report_offline.txt")).unwrap();
    assert!(offline.contains("baseline_dt") && offline.contains("model"), "{offline}");
    let online = std::fs::read_to_string(out_dir.join("report_online.txt")).unwrap();
    assert!(online.contains("f=0.25") && online.contains("f=1"), "{online}");

    // the same seed reproduces the offline report exactly
    let again = dir.path().join("again");
    let again_s = again.to_str().unwrap();
    for cmd in ["build-dataset", "train", "train-baseline", "eval-offline"] {
        ok(&planwatch(&[cmd, "--config", &config, "--out", again_s, "--seed", "3"]));
    }
    for f in ["report_offline.json", "model.ckpt", "dataset/train.jsonl"] {
        assert_eq!(
            std::fs::read(out_dir.join(f)).unwrap(),
            std::fs::read(again.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(planwatch(&["--help"]).status.code(), Some(0));
    assert_eq!(planwatch(&[]).status.code(), Some(1));
    assert_eq!(planwatch(&["train"]).status.code(), Some(1));
    assert_eq!(planwatch(&["bogus", "--config", "x"]).status.code(), Some(1));

    let missing = dir.path().join("nope.json");
    assert_eq!(
        planwatch(&["build-dataset", "--config", missing.to_str().unwrap()]).status.code(),
        Some(2)
    );

    let config = write_config(
        dir.path(),
        r#"{"source": "scaled", "templates": "templates.jsonl", "count": 5, "policy": {"out_of_domain": true}}"#,
    );
    let out = dir.path().join("run");
    let res = planwatch(&["gen-workload", "--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3));
    assert!(out.join("workload_summary.json").exists());
}

#[test]
fn empty_stream_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SCALED);
    let out = dir.path().join("run");
    let out_s = out.to_str().unwrap();
    for cmd in ["build-dataset", "train"] {
        ok(&planwatch(&[cmd, "--config", &config, "--out", out_s]));
    }
    std::fs::write(dir.path().join("empty.jsonl"), "").unwrap();
    let empty = write_config(
        dir.path(),
        r#"{"source": "file", "path": "empty.jsonl"}"#,
    );
    let res = planwatch(&["simulate-stream", "--config", &empty, "--out", out_s, "--fresh"]);
    ok(&res);
    let report = std::fs::read_to_string(out.join("report_stream.json")).unwrap();
    assert!(report.contains("\"windows\": []"), "{report}");
}
