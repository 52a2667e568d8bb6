use std::path::Path;
use std::process::{Command, Output};

fn loe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loe")).args(args).output().expect("run loe")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

/// Small synthetic fixture: labeled set, collection, topics and qrels.
fn fixture() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let out = loe(&[
        "synth", "--out", &p(dir.path(), ""), "--seed", "3", "--docs", "400", "--topics", "6", "--labeled", "350",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    dir
}

#[test]
fn exit_codes() {
    assert_eq!(code(&loe(&["--help"])), 0);
    assert_eq!(code(&loe(&["--version"])), 0);
    assert_eq!(code(&loe(&[])), 1);
    assert_eq!(code(&loe(&["search", "--bogus", "x"])), 1);
    assert_eq!(code(&loe(&["search", "--index", "/definitely/missing.idx", "x"])), 2);
    assert_eq!(code(&loe(&["search", "--index", "/definitely/missing.idx", "--band", "loe9", "x"])), 1);
    assert_eq!(code(&loe(&["vote", "only-one.jsonl"])), 1);
    let missing = loe(&["train", "--corpus", "/definitely/missing.jsonl"]);
    assert_eq!(code(&missing), 2);
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error: "));
}

#[test]
fn help_lists_every_command() {
    let help = stdout(&loe(&["--help"]));
    for cmd in ["train", "classify", "vote", "index", "search", "eval", "explain", "serve", "synth"] {
        assert!(help.contains(cmd), "{cmd} missing from help");
    }
}

#[test]
fn training_is_reproducible() {
    let dir = fixture();
    let labeled = p(dir.path(), "labeled.jsonl");
    let run = |model: &str| {
        let o = loe(&[
            "train", "--corpus", &labeled, "--seed", "7", "--trees", "25", "--features", "400", "--folds", "3",
            "--model", &p(dir.path(), model),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        stdout(&o)
    };
    let first = run("a.json");
    let second = run("b.json");
    assert_eq!(first, second);
    assert_eq!(
        std::fs::read(dir.path().join("a.json")).unwrap(),
        std::fs::read(dir.path().join("b.json")).unwrap()
    );
    assert!(first.starts_with("split: train 210 / valid 70 / test 70 (seed 7)"), "{first}");
    assert!(first.contains("RandomForest") && first.contains("Majority"));
    assert!(first.contains("3-fold cross-validation"));
    assert!(first.contains("per-level F1: 1a "));
}

#[test]
fn vote_merges_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| {
        let path = p(dir.path(), name);
        std::fs::write(&path, body).unwrap();
        path
    };
    let a = write(
        "a.jsonl",
        "{\"doc_id\":\"x\",\"confidences\":{\"1a\":0.1,\"1b\":0.7,\"2a\":0.2,\"2b\":0,\"3a\":0,\"3b\":0,\"4\":0},\"loe\":\"1b\",\"source\":\"m\"}\n\
         {\"doc_id\":\"y\",\"loe\":\"4\"}\n",
    );
    let b = write("b.jsonl", "{\"doc_id\":\"x\",\"raw\":1.1}\n{\"doc_id\":\"y\",\"raw\":2.2}\n");
    let c = write("c.jsonl", "{\"doc_id\":\"x\",\"loe\":\"2a\"}\n{\"doc_id\":\"y\",\"loe\":\"2a\"}\n");
    let o = loe(&["vote", &a, &b, &c]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let lines: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["doc_id"], "x");
    assert_eq!(lines[0]["loe"], "1b");
    assert_eq!(lines[0]["votes"]["1b"], 2);
    assert_eq!(lines[1]["loe"], "2a");

    let out = p(dir.path(), "merged.jsonl");
    assert_eq!(code(&loe(&["vote", &a, "--predictions", &b, "--out", &out])), 0);
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 2);
}

#[test]
fn tag_index_search_and_evaluate() {
    let dir = fixture();
    let d = dir.path();
    let model = p(d, "model.json");
    let o = loe(&[
        "train", "--corpus", &p(d, "labeled.jsonl"), "--trees", "25", "--features", "400", "--folds", "0",
        "--model", &model,
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let preds = p(d, "preds.jsonl");
    let o = loe(&[
        "classify", "--model", &model, "--corpus", &p(d, "collection.jsonl"), "--out", &preds, "--tagged",
        &p(d, "tagged.jsonl"),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read_to_string(&preds).unwrap().lines().count(), 400);
    let summary = stdout(&o);
    assert!(summary.starts_with("Level"), "{summary}");
    assert_eq!(summary.lines().count(), 8);

    let idx = p(d, "tagged.idx");
    let o = loe(&["index", "--corpus", &p(d, "tagged.jsonl"), "--out", &idx]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("indexed 400 documents"));

    let o = loe(&["search", "--index", &idx, "--k", "5", "--format", "json", "randomized", "trial"]);
    assert_eq!(code(&o), 0);
    let hits: Vec<serde_json::Value> = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(!hits.is_empty() && hits.len() <= 5);

    let o = loe(&[
        "eval", "--index", &idx, "--topics", &p(d, "topics.tsv"), "--qrels", &p(d, "qrels.txt"), "--names", "demo",
        "--runs", &p(d, "runs"),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = stdout(&o);
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines[0], "NDCG@10");
    assert!(lines[1].starts_with("Band") && lines[1].contains("size") && lines[1].ends_with("demo"));
    for (line, band) in lines[2..6].iter().zip(["All", "LoE3+", "LoE2+", "LoE1"]) {
        assert!(line.starts_with(band), "{line}");
        assert!(line.contains('%'));
    }
    assert!(lines[2].contains("100%"));
    assert!(lines[3..6].iter().all(|l| l.ends_with(')')));
    assert!(report.contains("infNDCG-approx / R-Prec / P@10"));
    assert_eq!(std::fs::read_dir(d.join("runs")).unwrap().count(), 4);

    let o = loe(&["eval", "--index", &idx, "--topics", &p(d, "topics.tsv")]);
    assert_eq!(code(&o), 1);
    let o = loe(&[
        "eval", "--corpus", &p(d, "collection.jsonl"), "--predictions", &preds, "--topics", &p(d, "topics.tsv"),
        "--qrels", &p(d, "qrels.txt"), "--names", "demo",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), report);

    let o = loe(&[
        "explain", "--model", &model, "--corpus", &p(d, "collection.jsonl"), "--limit", "5", "--samples", "200",
        "--top", "3", "--format", "csv",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = stdout(&o);
    assert!(csv.starts_with("level,rank,term,score\n"));
    assert!(csv.lines().count() > 1);
}

#[test]
fn serve_rejects_incomplete_configuration() {
    assert_eq!(code(&loe(&["serve"])), 1);
    assert_eq!(code(&loe(&["serve", "--index", "/missing.idx", "--model", "/missing.json"])), 2);
}
