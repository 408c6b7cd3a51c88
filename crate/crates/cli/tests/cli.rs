use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn soaguard(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_soaguard"))
        .args(args)
        .current_dir(dir)
        .env_remove("SOAGUARD_DATA_DIR")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = soaguard(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn manifest(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn generate_train_analyze_batch_evaluate() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(dir, &["generate", "--n", "120", "--seed", "3", "--out", "train", "--jobs", "1"]);
    ok(dir, &["generate", "--n", "120", "--seed", "3", "--out", "train2", "--jobs", "0"]);
    assert_eq!(files(&dir.join("train")), files(&dir.join("train2")));
    assert_eq!(files(&dir.join("train")).len(), 240);
    let m = manifest(&dir.join("train.manifest.json"));
    assert_eq!(m["command"], "generate");
    assert_eq!(m["seeds"]["corpus"], 3);

    ok(dir, &["generate", "--n", "12", "--seed", "7", "--out", "test"]);
    ok(dir, &["train", "--corpus", "train", "--out", "models", "--seed", "1"]);
    let m = manifest(&dir.join("models.manifest.json"));
    assert_eq!(m["model_checksums"].as_object().unwrap().len(), 5);
    assert!(dir.join("models.training.json").exists());

    let stdout = ok(dir, &["analyze", "--doc", "test/soa-s7-0001.json", "--models", "models"]);
    let line: Vec<&str> = stdout.trim().split('\t').collect();
    assert_eq!(line[0], "soa-s7-0001");
    assert!(["GREEN", "AMBER", "RED"].contains(&line[1]));
    assert!(line[2].ends_with(" ms"));
    let analysis = manifest(&dir.join("soa-s7-0001.assessment.json"));
    assert_eq!(analysis["assessment"]["kri_results"].as_array().unwrap().len(), 6);
    let m = manifest(&dir.join("soa-s7-0001.assessment.json.manifest.json"));
    assert_eq!(m["documents"].as_array().unwrap().len(), 1);
    assert!(m["policy_hash"].is_string());

    let stdout = ok(dir, &["batch", "--corpus", "test", "--models", "models", "--out", "b1", "--jobs", "1"]);
    assert_eq!(stdout.lines().filter(|l| l.ends_with(" ms")).count(), 12);
    ok(dir, &["batch", "--corpus", "test", "--models", "models", "--out", "b3", "--jobs", "3"]);
    assert_eq!(fs::read(dir.join("b1/batch.csv")).unwrap(), fs::read(dir.join("b3/batch.csv")).unwrap());
    assert_eq!(files(&dir.join("b1/assessments")), files(&dir.join("b3/assessments")));
    let csv = fs::read_to_string(dir.join("b1/batch.csv")).unwrap();
    assert_eq!(csv.lines().count(), 13);
    assert_eq!(manifest(&dir.join("b1.manifest.json"))["documents"].as_array().unwrap().len(), 12);

    let policy = r#"{"balance_red_below": "500000", "balance_amber_below": "600000"}"#;
    fs::write(dir.join("strict.json"), policy).unwrap();
    ok(dir, &["batch", "--corpus", "test", "--models", "models", "--policy", "strict.json", "--out", "strict"]);
    let strict = fs::read_to_string(dir.join("strict/batch.csv")).unwrap();
    assert_ne!(strict, csv);

    let stdout = ok(dir, &["evaluate", "--corpus", "test", "--models", "models", "--out", "eval.json"]);
    assert!(stdout.contains("macro_f1 goal_rec\t") && stdout.contains("match overall\t"));
    let report = manifest(&dir.join("eval.json"));
    assert_eq!(report["documents"], 12);
    assert_eq!(report["kri"].as_object().unwrap().len(), 6);
}

#[test]
fn usage_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        vec!["frobnicate"],
        vec!["generate", "--n", "ten", "--seed", "1", "--out", "x"],
        vec!["generate", "--seed", "1", "--out", "x"],
        vec!["batch", "--corpus", "c", "--out", "o"],
    ] {
        assert_eq!(soaguard(tmp.path(), &args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn runtime_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let out = soaguard(dir, &["analyze", "--doc", "missing.json", "--models", "nowhere"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: loading models from nowhere"));
    assert_eq!(soaguard(dir, &["report", "--out", "r.csv"]).status.code(), Some(1));
    assert_eq!(soaguard(dir, &["generate", "--n", "0", "--seed", "1", "--out", "empty"]).status.code(), Some(1));
    fs::write(dir.join("mix.json"), r#"{"entries": []}"#).unwrap();
    let out = soaguard(dir, &["generate", "--n", "3", "--seed", "1", "--out", "c", "--mix", "mix.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn report_reads_the_data_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(dir, &["generate", "--n", "60", "--seed", "2", "--out", "train"]);
    ok(dir, &["train", "--corpus", "train", "--out", "models"]);
    let models = soaguard_core::pipeline::ModelSet::load(&dir.join("models")).unwrap();
    let analyzer = soaguard_core::pipeline::Analyzer::new(models, Default::default());
    let store = soaguard_service::Store::open(dir.join("data"), Some(std::sync::Arc::new(analyzer))).unwrap();
    let docs = soaguard_core::synth::read_documents(&dir.join("train")).unwrap();
    for d in &docs[..4] {
        store.ingest(d.clone()).unwrap();
        store.analyze(&d.id).unwrap();
    }
    store.ingest(docs[4].clone()).unwrap();
    let expected = store.batch_csv();
    drop(store);

    ok(dir, &["report", "--data-dir", "data", "--out", "flag.csv"]);
    let out = Command::new(env!("CARGO_BIN_EXE_soaguard"))
        .args(["report", "--out", "env.csv"])
        .current_dir(dir)
        .env("SOAGUARD_DATA_DIR", dir.join("data"))
        .output()
        .unwrap();
    assert!(out.status.success());
    for name in ["flag.csv", "env.csv"] {
        let csv = fs::read_to_string(dir.join(name)).unwrap();
        assert_eq!(csv, expected);
        assert_eq!(csv.lines().count(), 5);
    }
}
