use std::collections::HashMap;

use crate::syntax::is_keyword;

pub const MAX_ORDER: usize = 4;

fn ngram_counts<'a>(tokens: &'a [&'a str], n: usize) -> HashMap<&'a [&'a str], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped n-gram matches and hypothesis n-gram total, each token weighted
/// by `weight` (unigrams only; longer n-grams count 1 each).
fn clipped(hyp: &[&str], reference: &[&str], n: usize, weight: &dyn Fn(&str) -> f64) -> (f64, f64) {
    let h = ngram_counts(hyp, n);
    let r = ngram_counts(reference, n);
    let mut matched = 0.0;
    let mut total = 0.0;
    for (gram, &c) in &h {
        let w = if n == 1 { weight(gram[0]) } else { 1.0 };
        total += w * c as f64;
        matched += w * c.min(r.get(gram).copied().unwrap_or(0)) as f64;
    }
    (matched, total)
}

fn brevity_penalty(hyp_len: usize, ref_len: usize) -> f64 {
    if hyp_len == 0 {
        0.0
    } else if hyp_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    }
}

fn bleu_with(hyp: &[&str], reference: &[&str], weight: &dyn Fn(&str) -> f64) -> f64 {
    if hyp.is_empty() || reference.is_empty() {
        return if hyp.is_empty() && reference.is_empty() { 1.0 } else { 0.0 };
    }
    let mut log_sum = 0.0;
    for n in 1..=MAX_ORDER {
        let (m, c) = clipped(hyp, reference, n, weight);
        let p = if n == 1 {
            if m == 0.0 {
                return 0.0;
            }
            m / c
        } else {
            (m + 1.0) / (c + 1.0)
        };
        log_sum += p.ln();
    }
    brevity_penalty(hyp.len(), reference.len()) * (log_sum / MAX_ORDER as f64).exp()
}

/// Corpus-free sentence BLEU over tokens: uniform weights up to 4-grams,
/// add-one smoothing for n ≥ 2, and the usual brevity penalty.
pub fn bleu(hyp: &[&str], reference: &[&str]) -> f64 {
    bleu_with(hyp, reference, &|_| 1.0)
}

/// BLEU whose unigram precision counts MiniLang keywords `keyword_weight`
/// times as much as other tokens.
pub fn weighted_bleu(hyp: &[&str], reference: &[&str], keyword_weight: f64) -> f64 {
    bleu_with(hyp, reference, &|t| if is_keyword(t) { keyword_weight } else { 1.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn identity_is_one() {
        let t = toks("int f ( ) { return 1 ; }");
        assert!((bleu(&t, &t) - 1.0).abs() < 1e-12);
        assert!((weighted_bleu(&t, &t, 5.0) - 1.0).abs() < 1e-12);
        let short = toks("x");
        assert!((bleu(&short, &short) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_is_zero() {
        assert_eq!(bleu(&toks("a b c"), &toks("d e f")), 0.0);
        assert_eq!(bleu(&[], &toks("d")), 0.0);
    }

    #[test]
    fn hand_computed_value() {
        // hyp "a b c d" vs ref "a b x d e": p1 = 3/4, p2 = (1+1)/(3+1),
        // p3 = (0+1)/(2+1), p4 = (0+1)/(1+1), bp = exp(1 - 5/4).
        let got = bleu(&toks("a b c d"), &toks("a b x d e"));
        let want = (1.0f64 - 5.0 / 4.0).exp() * ((0.75f64 * 0.5 * (1.0 / 3.0) * 0.5).ln() / 4.0).exp();
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn keywords_dominate_weighted_unigrams() {
        // The hypothesis keeps the keyword and loses the identifier.
        let r = toks("return x");
        let h = toks("return y");
        let plain = bleu(&h, &r);
        let weighted = weighted_bleu(&h, &r, 5.0);
        assert!(weighted > plain);
        let p1 = 5.0f64 / 6.0;
        let want = (p1 * 0.5 * 1.0 * 1.0).ln() / 4.0;
        assert!((weighted - want.exp()).abs() < 1e-12);
    }
}
