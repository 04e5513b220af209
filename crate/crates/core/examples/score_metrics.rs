// Scores a few reconstructions of the same reference: an exact one, a
// renamed one, a copy of the rewritten input, and one that does not parse.

use denat::metrics::{score, CodeBleuWeights};

const REFERENCE: &str = "int sum(int n) { int s = 0; for (int i = 0; i < n; i++) { s += i; } return s; }";
const INPUT: &str = "int sum(int n) { int s = 0; int i = 0; while (i < n) { s += i; i++; } return s; }";

pub fn run() -> Result<f64, Box<dyn std::error::Error>> {
    let weights = CodeBleuWeights::default();
    let hyps = [
        ("exact", REFERENCE),
        ("renamed", "int sum(int m) { int t = 0; for (int k = 0; k < m; k++) { t += k; } return t; }"),
        ("copied input", INPUT),
        ("truncated", "int sum(int n) { int s = 0; for ("),
    ];
    println!("{:<13} {:>3} {:>6} {:>6} {:>6} {:>6} {:>8} {:>5}", "hypothesis", "EM", "SM", "DM", "BLEU", "wBLEU", "CodeBLEU", "dist");
    let mut renamed_cb = 0.0;
    for (name, hyp) in hyps {
        let r = score(hyp, REFERENCE, Some(INPUT), &weights)?;
        println!(
            "{name:<13} {:>3} {:>6.3} {:>6.3} {:>6.3} {:>6.3} {:>8.3} {:>5} {}{:?}",
            u8::from(r.exact_match),
            r.sm,
            r.dm,
            r.bleu,
            r.weighted_bleu,
            r.codebleu,
            r.token_edit_distance,
            if r.is_copy { "copy " } else { "" },
            r.flags,
        );
        if name == "renamed" {
            renamed_cb = r.codebleu;
        }
    }
    Ok(renamed_cb)
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
