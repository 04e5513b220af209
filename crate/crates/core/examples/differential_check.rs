// Runs two versions of a function side by side on random inputs: a correct
// rewrite passes, a rewrite with a dropped negation is caught with a
// concrete input.

use denat::interp::{equivalent, run as execute, ExternOracle, Value, Verdict, DEFAULT_FUEL};
use denat::syntax::SourceUnit;

const ORIGINAL: &str = "int clamp(int x, int hi) { if (x > hi) { return hi; } else { return x; } }";
const SWAPPED: &str = "int clamp(int x, int hi) { if (x <= hi) { return x; } else { return hi; } }";
const BROKEN: &str = "int clamp(int x, int hi) { if (x > hi) { return x; } else { return hi; } }";

pub fn run() -> Result<bool, Box<dyn std::error::Error>> {
    let a = SourceUnit::parse("original", ORIGINAL)?;
    let out = execute(&a, "clamp", &[Value::Int(9), Value::Int(4)], ExternOracle::new(0), DEFAULT_FUEL);
    println!("clamp(9, 4) = {:?}", out.result);

    let good = equivalent(&a, &SourceUnit::parse("swapped", SWAPPED)?, "clamp", 16, 1)?;
    println!("correct swap: {good:?}");
    let bad = equivalent(&a, &SourceUnit::parse("broken", BROKEN)?, "clamp", 16, 1)?;
    match &bad {
        Verdict::Divergent(w) => {
            let args: Vec<String> = w.args.iter().map(|v| v.to_string()).collect();
            println!("broken swap diverges on clamp({})", args.join(", "));
            println!("  original returns {:?}, rewrite returns {:?}", w.left.result, w.right.result);
        }
        other => println!("broken swap: {other:?}"),
    }
    Ok(good == Verdict::Equivalent && bad.is_divergent())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
