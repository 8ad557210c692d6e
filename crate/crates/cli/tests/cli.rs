use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn textgat(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_textgat"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], cwd: &Path) -> String {
    let out = textgat(args, cwd);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fail(args: &[&str], cwd: &Path) -> String {
    let out = textgat(args, cwd);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(!stderr.trim().is_empty());
    stderr
}

fn read_json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// A small synthetic corpus ingested and built into a graph inside a
/// temporary directory. Paths are relative to that directory.
struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        let ws = Self {
            dir: tempfile::tempdir().unwrap(),
        };
        ws.ok(&[
            "synth",
            "--classes",
            "3",
            "--docs-per-class",
            "20",
            "--vocab-per-class",
            "10",
            "--overlap",
            "5",
            "--out",
            "raw.jsonl",
        ]);
        ws.ok(&["ingest", "--input", "raw.jsonl", "--out", "corpus.txt"]);
        ws.ok(&[
            "build-graph",
            "--corpus",
            "corpus.txt",
            "--out",
            "graph.bin",
        ]);
        ws
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn ok(&self, args: &[&str]) -> String {
        ok(args, self.dir.path())
    }

    fn fail(&self, args: &[&str]) -> String {
        fail(args, self.dir.path())
    }

    fn train(&self, out_dir: &str, epochs: &str) {
        self.ok(&[
            "train",
            "--graph",
            "graph.bin",
            "--epochs",
            epochs,
            "--out-dir",
            out_dir,
        ]);
    }
}

fn csv_rows(path: impl AsRef<Path>) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn synth_is_deterministic_and_sized() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["synth", "--out", "a.jsonl"], dir.path());
    ok(&["synth", "--out", "b.jsonl"], dir.path());
    ok(&["synth", "--seed", "7", "--out", "c.jsonl"], dir.path());
    let a = fs::read(dir.path().join("a.jsonl")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.jsonl")).unwrap());
    assert_ne!(a, fs::read(dir.path().join("c.jsonl")).unwrap());
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 1000);
    assert!(dir.path().join("a.jsonl.manifest.json").exists());
}

#[test]
fn ingest_modes_and_stoplist() {
    let dir = tempfile::tempdir().unwrap();
    let raw = concat!(
        r#"{"id":"x","text":"中文 分类 , 的","label":"a","split":"train"}"#,
        "\n",
        r#"{"id":"y","text":"图 网络 的","label":"b","split":"test"}"#,
        "\n"
    );
    fs::write(dir.path().join("raw.jsonl"), raw).unwrap();
    fs::write(dir.path().join("stop.txt"), "的\n").unwrap();

    ok(
        &[
            "ingest",
            "--input",
            "raw.jsonl",
            "--mode",
            "word",
            "--out",
            "w.txt",
        ],
        dir.path(),
    );
    let word = read_json(dir.path().join("w.txt.stats.json"));
    assert_eq!(word["documents"], 2);
    assert_eq!(word["max_len"], 3);

    ok(
        &[
            "ingest",
            "--input",
            "raw.jsonl",
            "--mode",
            "char",
            "--out",
            "c.txt",
        ],
        dir.path(),
    );
    let chars = read_json(dir.path().join("c.txt.stats.json"));
    assert_eq!(chars["max_len"], 5);

    ok(
        &[
            "ingest",
            "--input",
            "raw.jsonl",
            "--stoplist",
            "stop.txt",
            "--out",
            "s.txt",
        ],
        dir.path(),
    );
    let stopped = read_json(dir.path().join("s.txt.stats.json"));
    assert_eq!(stopped["max_len"], 2);
    assert_eq!(stopped["min_len"], 2);
}

#[test]
fn ingest_reports_malformed_input() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.jsonl"), "{\"id\":\"x\"}\n").unwrap();
    let err = fail(
        &["ingest", "--input", "bad.jsonl", "--out", "o.txt"],
        dir.path(),
    );
    assert!(err.contains("line 1"), "{err}");
    fail(
        &["ingest", "--input", "missing.jsonl", "--out", "o.txt"],
        dir.path(),
    );
}

#[test]
fn build_graph_summary() {
    let ws = Workspace::new();
    let summary: Value = serde_json::from_str(&ws.ok(&[
        "build-graph",
        "--corpus",
        "corpus.txt",
        "--out",
        "g25.bin",
    ]))
    .unwrap();
    let docs = summary["documents"].as_u64().unwrap();
    let terms = summary["terms"].as_u64().unwrap();
    assert_eq!(docs, 60);
    assert_eq!(summary["nodes"].as_u64().unwrap(), docs + terms);
    assert_eq!(summary["window_size"], 25);

    let narrow: Value = serde_json::from_str(&ws.ok(&[
        "build-graph",
        "--corpus",
        "corpus.txt",
        "--window-size",
        "1",
        "--out",
        "g1.bin",
    ]))
    .unwrap();
    assert!(narrow["edges"].as_u64() < summary["edges"].as_u64());
    let manifest = read_json(ws.path("g1.bin.manifest.json"));
    assert_eq!(manifest["resolved"]["window_size"], 1);
    assert_eq!(manifest["outputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn train_writes_runlog_and_replays_identically() {
    let ws = Workspace::new();
    ws.train("run", "5");
    let rows = csv_rows(ws.path("run/runlog.csv"));
    assert_eq!(
        rows[0].join(","),
        "epoch,train_loss,val_loss,val_acc,wall_ms"
    );
    assert_eq!(rows.len(), 6);

    let before = fs::read(ws.path("run/checkpoint.bin")).unwrap();
    let manifest_before = read_json(ws.path("run/manifest.json"));
    ws.ok(&["replay", "--manifest", "run/manifest.json"]);
    assert_eq!(fs::read(ws.path("run/checkpoint.bin")).unwrap(), before);
    assert_eq!(
        read_json(ws.path("run/manifest.json"))["outputs"],
        manifest_before["outputs"]
    );
}

#[test]
fn config_file_and_overrides() {
    let ws = Workspace::new();
    fs::write(
        ws.path("cfg.toml"),
        "epochs = 4\nheads = 2\narchitecture = \"gcn\"\n",
    )
    .unwrap();
    ws.ok(&[
        "train",
        "--graph",
        "graph.bin",
        "--config",
        "cfg.toml",
        "--out-dir",
        "a",
    ]);
    assert_eq!(csv_rows(ws.path("a/runlog.csv")).len(), 5);
    let resolved = &read_json(ws.path("a/manifest.json"))["resolved"]["config"];
    assert_eq!(resolved["architecture"], "gcn");

    ws.ok(&[
        "train",
        "--graph",
        "graph.bin",
        "--config",
        "cfg.toml",
        "--epochs",
        "2",
        "--set",
        "patience=0",
        "--out-dir",
        "b",
    ]);
    assert_eq!(csv_rows(ws.path("b/runlog.csv")).len(), 3);

    let err = ws.fail(&[
        "train",
        "--graph",
        "graph.bin",
        "--set",
        "no_such_key=1",
        "--out-dir",
        "c",
    ]);
    assert!(err.contains("no_such_key"), "{err}");
    ws.fail(&[
        "train",
        "--graph",
        "graph.bin",
        "--learning-rate",
        "-1",
        "--out-dir",
        "d",
    ]);
}

#[test]
fn evaluate_single_and_repeated() {
    let ws = Workspace::new();
    ws.train("run", "20");
    ws.ok(&[
        "evaluate",
        "--graph",
        "graph.bin",
        "--checkpoint",
        "run/checkpoint.bin",
        "--out",
        "eval",
    ]);
    let report = read_json(ws.path("eval/report.json"));
    let acc = report["accuracy"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&acc));
    let rows = csv_rows(ws.path("eval/report.csv"));
    assert_eq!(rows[0].join(","), "class,precision,recall,f_score");
    assert_eq!(rows.len(), 1 + 3 + 2);

    ws.ok(&[
        "evaluate",
        "--graph",
        "graph.bin",
        "--checkpoint",
        "run/checkpoint.bin",
        "--repeats",
        "3",
        "--baseline",
        "gcn",
        "--out",
        "rep",
    ]);
    let rows = csv_rows(ws.path("rep/report.csv"));
    assert_eq!(rows[0].join(","), "metric,mean,std");
    assert!(rows.iter().any(|r| r[0] == "accuracy"));
    assert!(rows.iter().any(|r| r[0] == "baseline_accuracy"));
    let rep = read_json(ws.path("rep/report.json"));
    let p = rep["t_test"]["p_value"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&p));
    assert_eq!(rep["summary"]["seeds"].as_array().unwrap().len(), 3);

    ws.fail(&[
        "evaluate",
        "--graph",
        "graph.bin",
        "--checkpoint",
        "run/checkpoint.bin",
        "--baseline",
        "gcn",
        "--out",
        "x",
    ]);
}

#[test]
fn predict_writes_one_row_per_document() {
    let ws = Workspace::new();
    ws.train("run", "10");
    ws.ok(&[
        "predict",
        "--graph",
        "graph.bin",
        "--checkpoint",
        "run/checkpoint.bin",
        "--out",
        "pred.csv",
    ]);
    let rows = csv_rows(ws.path("pred.csv"));
    assert_eq!(rows[0][..3].join(","), "id,split,predicted");
    assert_eq!(rows.len(), 61);
    for row in &rows[1..] {
        let total: f64 = row[3..].iter().map(|v| v.parse::<f64>().unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!(rows[0][3..].contains(&row[2]));
    }
}

#[test]
fn checkpoint_for_another_graph_is_rejected() {
    let ws = Workspace::new();
    ws.train("run", "2");
    ws.ok(&[
        "synth",
        "--classes",
        "2",
        "--docs-per-class",
        "10",
        "--out",
        "other.jsonl",
    ]);
    ws.ok(&["ingest", "--input", "other.jsonl", "--out", "other.txt"]);
    ws.ok(&["build-graph", "--corpus", "other.txt", "--out", "other.bin"]);
    let err = ws.fail(&[
        "predict",
        "--graph",
        "other.bin",
        "--checkpoint",
        "run/checkpoint.bin",
        "--out",
        "p.csv",
    ]);
    assert!(err.starts_with("error:"), "{err}");
    fs::write(ws.path("junk.bin"), b"not a checkpoint").unwrap();
    ws.fail(&[
        "predict",
        "--graph",
        "graph.bin",
        "--checkpoint",
        "junk.bin",
        "--out",
        "p.csv",
    ]);
}

#[test]
fn ablations() {
    let ws = Workspace::new();
    ws.ok(&[
        "ablate",
        "--kind",
        "heads",
        "--graph",
        "graph.bin",
        "--epochs",
        "3",
        "--out-dir",
        "h",
    ]);
    let rows = csv_rows(ws.path("h/heads.csv"));
    assert_eq!(
        rows[0].join(","),
        "heads,test_accuracy,mean_epoch_ms,epochs"
    );
    let heads: Vec<&str> = rows[1..].iter().map(|r| r[0].as_str()).collect();
    assert_eq!(heads, ["1", "4", "8", "12"]);

    ws.ok(&[
        "ablate",
        "--kind",
        "labels",
        "--graph",
        "graph.bin",
        "--fractions",
        "0.5,1.0",
        "--epochs",
        "3",
        "--jobs",
        "2",
        "--out-dir",
        "l",
    ]);
    let rows = csv_rows(ws.path("l/labels.csv"));
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][0], "0.5");
    assert!(rows[1][1].parse::<usize>().unwrap() < rows[2][1].parse::<usize>().unwrap());

    ws.ok(&[
        "ingest",
        "--input",
        "raw.jsonl",
        "--mode",
        "char",
        "--out",
        "chars.txt",
    ]);
    ws.ok(&[
        "ablate",
        "--kind",
        "tokenization",
        "--char-corpus",
        "chars.txt",
        "--word-corpus",
        "corpus.txt",
        "--epochs",
        "3",
        "--out-dir",
        "t",
    ]);
    let rows = csv_rows(ws.path("t/tokenization.csv"));
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][0], "char");
    assert_eq!(rows[2][0], "word");
    assert!(ws.path("t/manifest.json").exists());

    ws.fail(&[
        "ablate",
        "--kind",
        "heads",
        "--epochs",
        "3",
        "--out-dir",
        "missing",
    ]);
}

#[test]
fn usage_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    fail(&[], dir.path());
    fail(&["train"], dir.path());
    fail(&["synth", "--classes", "0", "--out", "x.jsonl"], dir.path());
    let err = fail(&["replay", "--manifest", "nothing.json"], dir.path());
    assert!(err.contains("nothing.json"), "{err}");
}
