// Applies each of the six rewrites to a binary search and prints the
// result, then lets the engine pick one from a seed.
//
// ```text
// cargo run --example transform_rules
// ```

use denat::syntax::SourceUnit;
use denat::transforms::{apply, find_sites, RuleConfig, RuleId};

const BSEARCH: &str = include_str!("../tests/fixtures/bsearch.mini");

pub fn run() -> Result<Vec<(RuleId, String)>, Box<dyn std::error::Error>> {
    let unit = SourceUnit::parse("bsearch.mini", BSEARCH)?;
    println!("original:\n  {}\n", unit.canonical());
    let mut rewrites = Vec::new();
    for rule in RuleId::ALL {
        let sites = find_sites(&unit, rule);
        if sites.is_empty() {
            println!("{rule}: no site");
            continue;
        }
        let out = apply(&unit, &RuleConfig::only(rule), 7)?;
        println!("{rule} ({} sites):\n  {}", sites.len(), out.transformed.text);
        for (k, v) in &out.auxiliary {
            println!("    {k} = {v}");
        }
        rewrites.push((rule, out.transformed.text));
    }
    let picked = apply(&unit, &RuleConfig::default(), 42)?;
    println!("\nseed 42 picks {}", picked.rule);
    Ok(rewrites)
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
