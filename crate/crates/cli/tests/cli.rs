use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use steelpower::synthetic::steel_like_csv;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_steelpower"))
}

fn fixture(dir: &Path, rows: usize) -> PathBuf {
    let p = dir.join("steel.csv");
    std::fs::write(&p, steel_like_csv(rows, 11)).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn coefficients(model_json: &Path) -> Vec<f64> {
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(model_json).unwrap()).unwrap();
    v["model"]["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_f64().unwrap())
        .collect()
}

#[test]
fn knn_sweep_default_writes_40_rows() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture(dir.path(), 600);
    let out = dir.path().join("out");
    ok(&["knn-sweep", "--input", s(&input), "--out-dir", s(&out)]);
    let csv = std::fs::read_to_string(out.join("knn_sweep.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("k,error_rate"));
    assert_eq!(csv.lines().count(), 41);
}

#[test]
fn ridge_at_zero_matches_ols() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture(dir.path(), 800);
    let out = dir.path().join("out");
    let common = [
        "--input",
        s(&input),
        "--out-dir",
        s(&out),
        "--standardize-features",
        "false",
    ];
    ok(&[&["train", "--model", "ols"], &common[..]].concat());
    ok(&[&["train", "--model", "ridge", "--lambda", "0"], &common[..]].concat());
    let a = coefficients(&out.join("model_ols.json"));
    let b = coefficients(&out.join("model_ridge.json"));
    assert_eq!(a.len(), 15);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-8, "{x} vs {y}");
    }
}

#[test]
fn inspect_reports_no_nulls() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture(dir.path(), 300);
    let out = dir.path().join("eda");
    let o = ok(&[
        "inspect",
        "--input",
        s(&input),
        "--out-dir",
        s(&out),
        "--bins",
        "10",
    ]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("total nulls: 0"));
    for f in [
        "null_report.json",
        "null_counts.csv",
        "histograms.csv",
        "correlation.csv",
    ] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let hist = std::fs::read_to_string(out.join("histograms.csv")).unwrap();
    // target plus 15 features, 10 bins each, except constant columns
    assert!(hist.lines().count() > 100);
}

#[test]
fn split_writes_partition() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture(dir.path(), 100);
    let out = dir.path().join("split");
    ok(&["split", "--input", s(&input), "--out-dir", s(&out)]);
    let train = std::fs::read_to_string(out.join("train.csv")).unwrap();
    let test = std::fs::read_to_string(out.join("test.csv")).unwrap();
    assert_eq!(train.lines().count(), 76);
    assert_eq!(test.lines().count(), 26);
}

#[test]
fn report_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture(dir.path(), 700);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        ok(&[
            "report",
            "--input",
            s(&input),
            "--out-dir",
            s(out),
            "--grid-size",
            "10",
            "--k-max",
            "8",
        ]);
    }
    for f in [
        "report.json",
        "coefficients.csv",
        "path_lasso.csv",
        "path_ridge.csv",
        "knn_sweep.csv",
    ] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["coefficient_tables"].as_array().unwrap().len(), 4);
    assert_eq!(report["provenance"]["seed"], 42);
}

#[test]
fn evaluate_saved_model() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture(dir.path(), 500);
    let out = dir.path().join("out");
    ok(&[
        "train",
        "--model",
        "lasso,knn",
        "--input",
        s(&input),
        "--out-dir",
        s(&out),
        "--k-max",
        "5",
    ]);
    let model = out.join("model_lasso.json");
    let o = ok(&[
        "evaluate",
        "--model-file",
        s(&model),
        "--input",
        s(&input),
        "--out-dir",
        s(&out),
    ]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("LASSO"));
    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("model_evaluation.json")).unwrap())
            .unwrap();
    assert!(metrics[0]["r_squared"].as_f64().unwrap() > 0.5);
}

#[test]
fn path_rejects_non_penalized_model() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture(dir.path(), 200);
    let o = run(&[
        "path",
        "--model",
        "ols",
        "--input",
        s(&input),
        "--out-dir",
        s(&dir.path().join("o")),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture(dir.path(), 200);
    let out = dir.path().join("o");

    // usage
    assert_eq!(
        run(&["report", "--input", s(&input), "--bogus"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["report"]).status.code(), Some(2));
    assert_eq!(
        run(&["report", "--input", s(&input), "--model", "svm"])
            .status
            .code(),
        Some(2)
    );

    // config
    let missing = dir.path().join("missing.csv");
    let o = run(&["report", "--input", s(&missing), "--out-dir", s(&out)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.csv"));
    assert_eq!(
        run(&["report", "--input", s(&input), "--test-fraction", "1.5"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        run(&["report", "--input", s(&input), "--k-max", "0"])
            .status
            .code(),
        Some(3)
    );

    // data
    let unseen = dir.path().join("unseen.csv");
    std::fs::write(&unseen, steel_like_csv(50, 1).replace("Monday", "Funday")).unwrap();
    let o = run(&["report", "--input", s(&unseen), "--out-dir", s(&out)]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Funday"));

    // numeric: a constant target leaves R² undefined
    let flat: String = steel_like_csv(120, 2)
        .lines()
        .enumerate()
        .map(|(i, l)| {
            if i == 0 {
                format!("{l}\n")
            } else {
                let mut c: Vec<&str> = l.split(',').collect();
                c[1] = "5";
                format!("{}\n", c.join(","))
            }
        })
        .collect();
    let flat_path = dir.path().join("flat.csv");
    std::fs::write(&flat_path, flat).unwrap();
    let o = run(&[
        "evaluate",
        "--model",
        "ols",
        "--input",
        s(&flat_path),
        "--out-dir",
        s(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(5),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(!out.join("model_evaluation.json").exists());
}
