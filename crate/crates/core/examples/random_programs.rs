// Generates seeded random MiniLang programs and runs their entry points
// on the arguments the equivalence check would draw.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use denat::gen::{generate_with, GenConfig};
use denat::interp::{entry_points, random_value, run as execute, signature, ExternOracle, DEFAULT_FUEL};
use denat::syntax::SourceUnit;

pub fn run() -> Result<usize, Box<dyn std::error::Error>> {
    let config = GenConfig {
        max_statements: 6,
        ..GenConfig::default()
    };
    let mut traced = 0;
    for seed in 0..3 {
        let text = generate_with(&config, seed);
        let unit = SourceUnit::parse("random", &text)?;
        println!("seed {seed}:\n{text}");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for entry in entry_points(&unit) {
            let types = signature(&unit, &entry).unwrap_or_default();
            let args = types.iter().map(|t| random_value(t, &mut rng)).collect::<Result<Vec<_>, _>>()?;
            let out = execute(&unit, &entry, &args, ExternOracle::new(seed), DEFAULT_FUEL);
            let shown: Vec<String> = args.iter().map(|a| a.to_string()).collect();
            println!(
                "  {entry}({}) -> {:?}, {} trace events, {:?}",
                shown.join(", "),
                out.result,
                out.trace.len(),
                out.status
            );
            traced += out.trace.len();
        }
    }
    Ok(traced)
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
