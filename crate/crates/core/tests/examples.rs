macro_rules! example {
    ($name:ident) => {
        #[allow(dead_code)]
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", stringify!($name), ".rs"));
        }
    };
}

example!(transform_rules);
example!(dataflow_graph);
example!(differential_check);
example!(score_metrics);
example!(random_programs);
example!(generate_dataset);

#[test]
fn transform_rules_covers_every_rule_on_the_fixture_but_one() {
    let rewrites = transform_rules::run().unwrap();
    assert_eq!(rewrites.len(), 5);
}

#[test]
fn dataflow_graph_finds_edges() {
    assert!(dataflow_graph::run().unwrap() > 5);
}

#[test]
fn differential_check_separates_good_and_bad() {
    assert!(differential_check::run().unwrap());
}

#[test]
fn score_metrics_renamed_is_partial() {
    let cb = score_metrics::run().unwrap();
    assert!(cb > 0.3 && cb < 1.0, "{cb}");
}

#[test]
fn random_programs_run() {
    assert!(random_programs::run().unwrap() > 0);
}

#[test]
fn generate_dataset_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(generate_dataset::run(dir.path()).unwrap(), 40);
    for f in ["pairs.jsonl", "split.json", "copier.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}
