use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qsvm::bench::{AccuracyReport, ExperimentSpec, Method, ScalingReport};
use qsvm::solver::BinarySolution;

fn qsvm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsvm"))
        .args(args)
        .env("QSVM_THREADS", "1")
        .output()
        .expect("failed to launch qsvm")
}

fn ok(args: &[&str]) -> String {
    let out = qsvm(args);
    assert!(
        out.status.success(),
        "qsvm {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Runs a command expected to fail and returns the `kind` of its error.
fn error_kind(args: &[&str]) -> String {
    let out = qsvm(args);
    assert!(
        !out.status.success(),
        "qsvm {args:?} unexpectedly succeeded"
    );
    let stderr = String::from_utf8(out.stderr).unwrap();
    let body: serde_json::Value =
        serde_json::from_str(stderr.trim()).unwrap_or_else(|_| panic!("not json: {stderr}"));
    assert!(body["error"]["message"].is_string());
    body["error"]["kind"].as_str().unwrap().to_string()
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_train_evaluate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("blobs.csv");
    ok(&[
        "generate",
        "blobs",
        "-n",
        "16",
        "-d",
        "3",
        "--seed",
        "4",
        "--out",
        s(&data),
    ]);

    for method in ["annealing", "exhaustive", "baseline"] {
        let model = dir.path().join(format!("{method}.json"));
        let mut args = vec![
            "train",
            "--data",
            s(&data),
            "--method",
            method,
            "--out",
            s(&model),
        ];
        if method == "exhaustive" {
            // 6 points x 4 bits stays within the enumeration limit.
            ok(&[
                "generate",
                "blobs",
                "-n",
                "6",
                "-d",
                "3",
                "--seed",
                "4",
                "--out",
                s(&data),
            ]);
        } else {
            args.extend(["--reads", "4", "--sweeps", "300"]);
        }
        let summary: serde_json::Value = serde_json::from_str(&ok(&args)).unwrap();
        assert_eq!(summary["train_accuracy"], 1.0, "{method}: {summary}");

        let eval: serde_json::Value =
            serde_json::from_str(&ok(&["evaluate", "--model", s(&model), "--data", s(&data)]))
                .unwrap();
        assert_eq!(eval["accuracy"], 1.0, "{method}");
    }
}

#[test]
fn generate_prints_csv_without_out() {
    let csv = ok(&[
        "generate",
        "hyperplane",
        "-n",
        "10",
        "--normal=-1,1",
        "--offset",
        "0.1",
    ]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x0,x1,label");
    assert_eq!(lines.len(), 11);
}

#[test]
fn exported_qubo_can_be_solved() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let qubo = dir.path().join("q.json");
    ok(&["generate", "blobs", "-n", "4", "-d", "2", "--out", s(&data)]);
    ok(&[
        "qubo-export",
        "--data",
        s(&data),
        "--precision",
        "0.5,1",
        "--out",
        s(&qubo),
    ]);

    let exact = BinarySolution::from_json(&ok(&[
        "solve",
        "--qubo",
        s(&qubo),
        "--method",
        "exhaustive",
    ]))
    .unwrap();
    let sampled = BinarySolution::from_json(&ok(&[
        "solve",
        "--qubo",
        s(&qubo),
        "--reads",
        "20",
        "--sweeps",
        "500",
    ]))
    .unwrap();
    assert_eq!(exact.bits.len(), 8);
    assert!((exact.energy - sampled.energy).abs() < 1e-9);
    assert!(exact.energy < 0.0);
}

#[test]
fn accuracy_bench_reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs().join("iris-setosa-virginica.toml");
    let run = |tag: &str| {
        let json = dir.path().join(format!("{tag}.json"));
        let csv = dir.path().join(format!("{tag}.csv"));
        ok(&[
            "accuracy-bench",
            "--config",
            s(&config),
            "--repetitions",
            "2",
            "--no-timings",
            "--out-json",
            s(&json),
            "--out-csv",
            s(&csv),
        ]);
        (
            std::fs::read(json).unwrap(),
            std::fs::read_to_string(csv).unwrap(),
        )
    };
    let (json_a, csv_a) = run("a");
    let (json_b, csv_b) = run("b");
    assert_eq!(json_a, json_b);
    assert_eq!(csv_a, csv_b);

    let report = AccuracyReport::from_json(std::str::from_utf8(&json_a).unwrap()).unwrap();
    assert_eq!(
        report
            .aggregate("iris-setosa-virginica", Method::Annealing)
            .unwrap()
            .runs,
        2
    );
    // Header plus baseline and annealing rows per repetition.
    assert_eq!(csv_a.lines().count(), 5);
}

#[test]
fn sweep_and_scaling_benches() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&[
        "sweep-bench",
        "--config",
        s(&configs().join("iris-setosa-versicolor.toml")),
        "--repetitions",
        "2",
        "--budgets",
        "5,50",
    ]);
    let report = AccuracyReport::from_json(&out).unwrap();
    assert_eq!(report.aggregates.len(), 2);

    let csv = dir.path().join("points.csv");
    let out = ok(&[
        "point-bench",
        "--config",
        s(&configs().join("scaling.toml")),
        "--grid",
        "4,8",
        "--samples",
        "1",
        "--reads",
        "1",
        "--sweeps",
        "5",
        "--out-csv",
        s(&csv),
        "--out-json",
        s(&dir.path().join("points.json")),
    ]);
    assert!(out.is_empty());
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 7);
    let report: ScalingReport =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("points.json")).unwrap())
            .unwrap();
    assert_eq!(report.cells.len(), 6);

    assert_eq!(
        error_kind(&[
            "feature-bench",
            "--config",
            s(&configs().join("scaling.toml")),
            "--grid",
            "32768"
        ]),
        "invalid-argument"
    );
}

#[test]
fn shipped_configs_are_valid() {
    let mut count = 0;
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let spec: ExperimentSpec = toml::from_str(&std::fs::read_to_string(&path).unwrap())
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(
            format!("{}.toml", spec.name),
            path.file_name().unwrap().to_str().unwrap()
        );
        count += 1;
    }
    assert!(count >= 8);
}

#[test]
fn failures_are_reported_as_json() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        error_kind(&[
            "evaluate",
            "--model",
            "/no/model.json",
            "--data",
            "/no/data.csv"
        ]),
        "io"
    );

    let one_class = dir.path().join("one.csv");
    std::fs::write(&one_class, "x,label\n1,1\n2,1\n").unwrap();
    assert_eq!(error_kind(&["train", "--data", s(&one_class)]), "ingest");

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "name = 3\n").unwrap();
    assert_eq!(
        error_kind(&["accuracy-bench", "--config", s(&bad)]),
        "invalid-config"
    );

    let data = dir.path().join("d.csv");
    ok(&["generate", "blobs", "-n", "20", "--out", s(&data)]);
    assert_eq!(error_kind(&["solve", "--qubo", s(&data)]), "serialization");
    assert_eq!(
        error_kind(&["train", "--data", s(&data), "--precision", "0.3"]),
        "invalid-argument"
    );
    let qubo = dir.path().join("q.json");
    ok(&["qubo-export", "--data", s(&data), "--out", s(&qubo)]);
    assert_eq!(
        error_kind(&["solve", "--qubo", s(&qubo), "--method", "exhaustive"]),
        "problem-too-large"
    );
}
