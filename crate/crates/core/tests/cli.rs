use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use denat::pipeline::{read_jsonl, write_jsonl, Hypothesis, PairRecord};

fn denat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_denat"))
        .args(args)
        .env_remove("DENAT_SEED")
        .output()
        .unwrap()
}

fn corpus(dir: &Path, n: u64) {
    for s in 0..n {
        fs::write(dir.join(format!("p{s:03}.mini")), denat::gen::generate_program(s)).unwrap();
    }
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/bsearch.mini");

#[test]
fn transform_is_deterministic_and_forced() {
    let a = denat(&["transform", FIXTURE, "--rule", "block-swap", "--seed", "7"]);
    let b = denat(&["transform", FIXTURE, "--rule", "block-swap", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("if ( arr [ mid ] != key ) { i = i + 1 ; } else { return mid ; }"));
    assert!(String::from_utf8(a.stderr).unwrap().contains("rule: block-swap"));
}

#[test]
fn transform_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let flat = dir.path().join("flat.mini");
    fs::write(&flat, "int f(int x) { return x; }").unwrap();
    assert_eq!(denat(&["transform", path(&flat), "--rule", "loop-exchange"]).status.code(), Some(3));
    let bad = dir.path().join("bad.mini");
    fs::write(&bad, "int f( {").unwrap();
    assert_eq!(denat(&["transform", path(&bad)]).status.code(), Some(2));
    let missing = dir.path().join("missing.mini");
    assert_eq!(denat(&["transform", path(&missing)]).status.code(), Some(1));
}

#[test]
fn seed_from_environment_only_without_flag() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_denat"));
        c.args(["transform", FIXTURE]);
        if let Some(s) = flag {
            c.args(["--seed", s]);
        }
        match env {
            Some(e) => c.env("DENAT_SEED", e),
            None => c.env_remove("DENAT_SEED"),
        };
        c.output().unwrap().stdout
    };
    assert_eq!(run(Some("11"), None), run(None, Some("11")));
    assert_eq!(run(Some("11"), Some("3")), run(None, Some("3")));
}

#[test]
fn generate_split_evaluate_check() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src");
    fs::create_dir(&src).unwrap();
    corpus(&src, 30);
    fs::write(src.join("broken.mini"), "int f( {").unwrap();
    let data = dir.path().join("pairs.jsonl");
    let rejects = dir.path().join("rejects.jsonl");

    let g = denat(&["generate", path(&src), "--out", path(&data), "--rejects", path(&rejects), "--seed", "5"]);
    assert_eq!(g.status.code(), Some(0), "{}", String::from_utf8_lossy(&g.stderr));
    let summary = String::from_utf8(g.stderr).unwrap();
    assert!(summary.contains("files 31 parsed 30 skipped 1"), "{summary}");
    let records: Vec<PairRecord> = read_jsonl(fs::read(&data).unwrap().as_slice()).unwrap();
    assert_eq!(records.len(), 30);
    assert!(fs::read(&rejects).unwrap().is_empty());

    let manifest = dir.path().join("split.json");
    let s = denat(&["split", path(&data), "--out", path(&manifest), "--valid-fraction", "0.1"]);
    assert_eq!(s.status.code(), Some(0));
    let m: serde_json::Value = serde_json::from_slice(&fs::read(&manifest).unwrap()).unwrap();
    assert_eq!(m["valid_ids"].as_array().unwrap().len(), 3);
    assert_eq!(m["train_ids"].as_array().unwrap().len(), 27);

    let hyps = dir.path().join("hyps.jsonl");
    let h: Vec<Hypothesis> = records
        .iter()
        .map(|r| Hypothesis {
            id: r.id.clone(),
            hypothesis: r.original.clone(),
        })
        .collect();
    write_jsonl(&h, fs::File::create(&hyps).unwrap()).unwrap();
    let csv = dir.path().join("report.csv");
    let e = denat(&["evaluate", path(&data), path(&hyps), "--out", path(&csv)]);
    assert_eq!(e.status.code(), Some(0));
    assert!(String::from_utf8(e.stderr).unwrap().contains("EM 1.0000"));
    assert!(fs::read_to_string(&csv).unwrap().starts_with("rule,count,em_rate"));

    assert_eq!(denat(&["check", path(&data)]).status.code(), Some(0));
    let mut corrupted = records.clone();
    corrupted[4].transformed = corrupted[4].transformed.replacen("return", "return 1 +", 1);
    let bad = dir.path().join("bad.jsonl");
    write_jsonl(&corrupted, fs::File::create(&bad).unwrap()).unwrap();
    let c = denat(&["check", path(&bad)]);
    assert_eq!(c.status.code(), Some(4));
    let findings = String::from_utf8(c.stdout).unwrap();
    assert!(findings.contains(&corrupted[4].id) && findings.contains("\"witness\""), "{findings}");
}

#[test]
fn generate_twice_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    corpus(dir.path(), 12);
    let out = |name: &str, jobs: &str| {
        let p = dir.path().join(name);
        let g = denat(&["generate", path(dir.path()), "--out", path(&p), "--seed", "9", "--jobs", jobs]);
        assert_eq!(g.status.code(), Some(0));
        fs::read(p).unwrap()
    };
    assert_eq!(out("a.jsonl", "1"), out("b.jsonl", "3"));
}

#[test]
fn malformed_dataset_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x.jsonl");
    fs::write(&p, "{not json\n").unwrap();
    assert_eq!(denat(&["check", path(&p)]).status.code(), Some(2));
    let m = dir.path().join("m.json");
    assert_eq!(denat(&["split", path(&p), "--out", path(&m)]).status.code(), Some(2));
    assert!(!m.exists());
}
