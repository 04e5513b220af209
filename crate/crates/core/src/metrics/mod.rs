//! Reconstruction metrics: exact match, syntax match, dataflow match,
//! BLEU, keyword-weighted BLEU, CodeBLEU, and token edit distance, plus the
//! copy analysis and per-rule aggregation used to read evaluation runs.
//!
//! ```
//! use denat::metrics::{score, CodeBleuWeights};
//!
//! let src = "int f(int x) { return x + 1; }";
//! let r = score(src, src, None, &CodeBleuWeights::default()).unwrap();
//! assert!(r.exact_match);
//! assert_eq!(r.codebleu, 1.0);
//! ```

mod bleu;
mod structure;

pub use bleu::{bleu, weighted_bleu, MAX_ORDER};
pub use structure::{dataflow_match, node_label, syntax_match};

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::dataflow::build_def_use;
use crate::syntax::{lex, parse, token_key, SourceUnit, SyntaxError, Token, TokenKind, Span};
use crate::transforms::RuleId;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("reference does not parse: {0}")]
    Reference(SyntaxError),
    #[error("reference has unresolved variables: {0}")]
    ReferenceDataflow(String),
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("invalid CodeBLEU weights: {0}")]
    InvalidWeights(String),
    #[error("csv output failed: {0}")]
    Csv(String),
}

/// Conditions under which a score was defined by convention.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricFlag {
    /// The hypothesis did not lex; whitespace tokens were used instead.
    HypothesisUnlexable,
    /// The hypothesis did not parse; SM and DM are 0.
    HypothesisUnparseable,
    /// The hypothesis uses undeclared variables; DM is 0.
    HypothesisUnresolved,
    /// The reference has no def-use edges; DM is 1.
    ReferenceWithoutEdges,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CodeBleuWeights {
    pub bleu: f64,
    pub weighted_bleu: f64,
    pub syntax: f64,
    pub dataflow: f64,
    pub keyword_weight: f64,
}

impl Default for CodeBleuWeights {
    fn default() -> Self {
        CodeBleuWeights {
            bleu: 0.25,
            weighted_bleu: 0.25,
            syntax: 0.25,
            dataflow: 0.25,
            keyword_weight: 5.0,
        }
    }
}

impl CodeBleuWeights {
    pub fn new(bleu: f64, weighted_bleu: f64, syntax: f64, dataflow: f64) -> Result<Self, MetricsError> {
        let w = CodeBleuWeights {
            bleu,
            weighted_bleu,
            syntax,
            dataflow,
            ..CodeBleuWeights::default()
        };
        let parts = [bleu, weighted_bleu, syntax, dataflow];
        if parts.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(MetricsError::InvalidWeights(format!("{parts:?} must be in [0, 1] and sum to 1")));
        }
        Ok(w)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricReport {
    pub exact_match: bool,
    pub sm: f64,
    pub dm: f64,
    pub bleu: f64,
    pub weighted_bleu: f64,
    pub codebleu: f64,
    /// Token-level Levenshtein distance from hypothesis to reference.
    pub token_edit_distance: usize,
    /// Hypothesis token-equal to the model input, when one was given.
    pub is_copy: bool,
    pub flags: Vec<MetricFlag>,
}

/// Exact match on token kind and lexeme, ignoring layout.
pub fn exact_match(hyp: &[Token], reference: &[Token]) -> bool {
    token_key(hyp) == token_key(reference)
}

/// Token Levenshtein distance.
pub fn token_edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (a, b): (Vec<&T>, Vec<&T>) = (a.iter().collect(), b.iter().collect());
    strsim::generic_levenshtein(&a, &b)
}

/// Lexes `text`, falling back to whitespace-separated words when it does
/// not lex.
fn tokens_or_words(text: &str) -> (Vec<Token>, bool) {
    match lex(text) {
        Ok(t) => (t, true),
        Err(_) => {
            let mut out = Vec::new();
            let mut offset = 0;
            for w in text.split_whitespace() {
                let start = text[offset..].find(w).map_or(offset, |i| offset + i);
                offset = start + w.len();
                out.push(Token {
                    kind: TokenKind::Identifier,
                    lexeme: w.to_string(),
                    span: Span::new(start, offset),
                });
            }
            (out, false)
        }
    }
}

/// Scores `hyp` against `reference`. `input`, when given, is the text the
/// model saw and is only used for copy detection.
pub fn score(
    hyp: &str,
    reference: &str,
    input: Option<&str>,
    weights: &CodeBleuWeights,
) -> Result<MetricReport, MetricsError> {
    let r = SourceUnit::parse("reference", reference).map_err(MetricsError::Reference)?;
    let r_graph = build_def_use(&r.ast).map_err(|e| MetricsError::ReferenceDataflow(e.to_string()))?;
    let (h_tokens, lexed) = tokens_or_words(hyp);
    let mut flags = Vec::new();
    if !lexed {
        flags.push(MetricFlag::HypothesisUnlexable);
    }
    let h_ast = if lexed { parse(&h_tokens, "hypothesis").ok() } else { None };
    let (sm, dm) = match &h_ast {
        None => {
            flags.push(MetricFlag::HypothesisUnparseable);
            if r_graph.edges.is_empty() {
                flags.push(MetricFlag::ReferenceWithoutEdges);
            }
            (0.0, if r_graph.edges.is_empty() { 1.0 } else { 0.0 })
        }
        Some(h) => {
            let sm = syntax_match(h, &r.ast);
            let dm = match build_def_use(h) {
                Ok(g) => dataflow_match(&g, &r_graph).unwrap_or_else(|| {
                    flags.push(MetricFlag::ReferenceWithoutEdges);
                    1.0
                }),
                Err(_) => {
                    flags.push(MetricFlag::HypothesisUnresolved);
                    if r_graph.edges.is_empty() {
                        flags.push(MetricFlag::ReferenceWithoutEdges);
                        1.0
                    } else {
                        0.0
                    }
                }
            };
            (sm, dm)
        }
    };
    let hl: Vec<&str> = h_tokens.iter().map(|t| t.lexeme.as_str()).collect();
    let rl = r.lexemes();
    let b = bleu(&hl, &rl);
    let wb = weighted_bleu(&hl, &rl, weights.keyword_weight);
    let codebleu = weights.bleu * b + weights.weighted_bleu * wb + weights.syntax * sm + weights.dataflow * dm;
    let r_keys = token_key(&r.tokens);
    let h_keys = token_key(&h_tokens);
    let is_copy = match input {
        Some(i) => {
            let (i_tokens, _) = tokens_or_words(i);
            token_key(&i_tokens) == h_keys
        }
        None => false,
    };
    Ok(MetricReport {
        exact_match: h_keys == r_keys,
        sm,
        dm,
        bleu: b,
        weighted_bleu: wb,
        codebleu,
        token_edit_distance: token_edit_distance(&h_keys, &r_keys),
        is_copy,
        flags,
    })
}

/// Lexemes of `text`, or its whitespace-separated words if it does not lex.
pub fn lexemes(text: &str) -> Vec<String> {
    tokens_or_words(text).0.into_iter().map(|t| t.lexeme).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CopyStats {
    pub copy_rate: f64,
    pub median_edit_distance: usize,
}

/// Rate of hypotheses identical to their input, and the lower median of
/// input-to-hypothesis token edit distances.
pub fn copy_analysis<T: PartialEq>(pairs: &[(Vec<T>, Vec<T>)]) -> Result<CopyStats, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let copies = pairs.iter().filter(|(i, h)| i == h).count();
    let mut distances: Vec<usize> = pairs.iter().map(|(i, h)| token_edit_distance(i, h)).collect();
    distances.sort_unstable();
    Ok(CopyStats {
        copy_rate: copies as f64 / pairs.len() as f64,
        median_edit_distance: distances[(distances.len() - 1) / 2],
    })
}

/// Mean scores of one rule's outcomes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BucketRow {
    pub rule: RuleId,
    pub count: usize,
    pub em_rate: f64,
    pub sm: f64,
    pub dm: f64,
    pub bleu: f64,
    pub wbleu: f64,
    pub codebleu: f64,
}

#[derive(Default)]
struct Sums {
    count: usize,
    em: f64,
    sm: f64,
    dm: f64,
    bleu: f64,
    wbleu: f64,
    cb: f64,
}

/// One row per rule present in `scored`, in rule order.
pub fn bucket_report(scored: &[(RuleId, MetricReport)]) -> Vec<BucketRow> {
    let mut sums: BTreeMap<RuleId, Sums> = BTreeMap::new();
    for (rule, r) in scored {
        let s = sums.entry(*rule).or_default();
        s.count += 1;
        s.em += f64::from(u8::from(r.exact_match));
        s.sm += r.sm;
        s.dm += r.dm;
        s.bleu += r.bleu;
        s.wbleu += r.weighted_bleu;
        s.cb += r.codebleu;
    }
    sums.into_iter()
        .map(|(rule, s)| {
            let n = s.count as f64;
            BucketRow {
                rule,
                count: s.count,
                em_rate: s.em / n,
                sm: s.sm / n,
                dm: s.dm / n,
                bleu: s.bleu / n,
                wbleu: s.wbleu / n,
                codebleu: s.cb / n,
            }
        })
        .collect()
}

pub const CSV_HEADER: [&str; 8] = ["rule", "count", "em_rate", "sm", "dm", "bleu", "wbleu", "codebleu"];

/// Writes the bucket table as CSV with rates to four decimals.
pub fn write_bucket_csv<W: Write>(rows: &[BucketRow], out: W) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| MetricsError::Csv(e.to_string());
    w.write_record(CSV_HEADER).map_err(err)?;
    for r in rows {
        let rates = [r.em_rate, r.sm, r.dm, r.bleu, r.wbleu, r.codebleu].map(|x| format!("{x:.4}"));
        let mut rec = vec![r.rule.name().to_string(), r.count.to_string()];
        rec.extend(rates);
        w.write_record(&rec).map_err(err)?;
    }
    w.flush().map_err(|e| MetricsError::Csv(e.to_string()))
}
