// End to end: writes a small corpus, turns it into training pairs, holds
// out a validation split, and scores a model that copies its input.
//
// ```text
// cargo run --example generate_dataset -- /tmp/denat-demo
// ```

use std::fs;
use std::path::{Path, PathBuf};

use denat::gen::generate_program;
use denat::metrics::CodeBleuWeights;
use denat::pipeline::{evaluate, generate_pairs, ingest, split, write_jsonl, GenerateOptions, Hypothesis};

pub fn run(dir: &Path) -> Result<usize, Box<dyn std::error::Error>> {
    let corpus = dir.join("corpus");
    fs::create_dir_all(&corpus)?;
    for seed in 0..40 {
        fs::write(corpus.join(format!("p{seed:02}.mini")), generate_program(seed))?;
    }
    let ingested = ingest(&[&corpus]);
    println!("ingested {} units, skipped {}", ingested.units.len(), ingested.report.skipped.len());

    let out = generate_pairs(&ingested.units, &GenerateOptions {
        master_seed: 1,
        ..GenerateOptions::default()
    })?;
    println!("{:?}", out.report);
    write_jsonl(&out.records, fs::File::create(dir.join("pairs.jsonl"))?)?;

    let manifest = split(&out.records, 0.1, 0)?;
    println!("train {} / valid {}", manifest.train_ids.len(), manifest.valid_ids.len());
    fs::write(dir.join("split.json"), serde_json::to_string_pretty(&manifest)?)?;

    let copier: Vec<Hypothesis> = out
        .records
        .iter()
        .map(|r| Hypothesis {
            id: r.id.clone(),
            hypothesis: r.transformed.clone(),
        })
        .collect();
    let eval = evaluate(&out.records, &copier, &CodeBleuWeights::default())?;
    eval.write_csv(fs::File::create(dir.join("copier.csv"))?)?;
    println!(
        "copier: EM {:.3} CodeBLEU {:.3} copy rate {:.3}",
        eval.summary.em_rate, eval.summary.codebleu, eval.summary.copy_rate
    );
    for b in &eval.buckets {
        println!("  {:<17} n={:<3} CodeBLEU {:.3}", b.rule.name(), b.count, b.codebleu);
    }
    Ok(out.records.len())
}

#[allow(dead_code)]
fn main() {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("denat-demo"));
    match run(&dir) {
        Ok(n) => println!("wrote {n} pairs under {}", dir.display()),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
