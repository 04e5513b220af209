//! Corpus side of the tool: read `.mini` files, turn each unit into a
//! (transformed, original) training pair, hold out a validation split, and
//! score model hypotheses against the pairs.
//!
//! Every stage is a pure function of its inputs and explicit seeds. Units are
//! processed on a worker pool but results are merged in input order, so two
//! runs with the same arguments write the same bytes.

mod evaluate;
mod generate;
mod ingest;
mod split;

pub use evaluate::{evaluate, Evaluation, Hypothesis, ScoredPair, Summary};
pub use generate::{audit, generate_pairs, unit_seed, AuditFinding, GenerateOptions, GenerateOutput, GenerateReport};
pub use ingest::{ingest, IngestReport, Ingested, SkippedFile};
pub use split::{split, SplitManifest, DEFAULT_VALID_FRACTION};

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::interp::Witness;
use crate::metrics::MetricsError;
use crate::syntax::Span;
use crate::transforms::{RuleId, TransformError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("the corpus is empty")]
    EmptyCorpus,
    #[error("validation fraction {0} is outside [0, 1]")]
    InvalidFraction(f64),
    #[error("hypothesis {index} has id `{found}` but pair {index} has id `{expected}`")]
    Alignment {
        index: usize,
        expected: String,
        found: String,
    },
    #[error("{pairs} pairs but {hyps} hypotheses")]
    AlignmentLength { pairs: usize, hyps: usize },
    #[error("record `{id}`: {message}")]
    BadRecord { id: String, message: String },
    #[error("cannot start worker pool: {0}")]
    Workers(String),
    #[error(transparent)]
    Config(#[from] TransformError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Byte offsets of the rewrite site within `original`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteSpan {
    pub start: usize,
    pub end: usize,
}

impl From<Span> for SiteSpan {
    fn from(s: Span) -> Self {
        SiteSpan { start: s.start, end: s.end }
    }
}

/// One training example: the model reads `transformed` and should produce
/// `original`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub id: String,
    pub language: String,
    pub original: String,
    pub transformed: String,
    pub rule: RuleId,
    pub site_span: SiteSpan,
    /// Decimal, so 64-bit seeds survive JSON readers that use doubles.
    pub seed: String,
    pub auxiliary: BTreeMap<String, String>,
}

/// A concrete disagreement, rendered for the reject stream.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub entry: String,
    pub args: Vec<String>,
    pub oracle_seed: String,
    pub original: String,
    pub transformed: String,
}

impl WitnessRecord {
    pub fn new(entry: &str, w: &Witness) -> Self {
        WitnessRecord {
            entry: entry.to_string(),
            args: w.args.iter().map(|a| a.to_string()).collect(),
            oracle_seed: w.oracle_seed.to_string(),
            original: w.left.to_string(),
            transformed: w.right.to_string(),
        }
    }
}

/// A pair that failed the equivalence gate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RejectRecord {
    #[serde(flatten)]
    pub record: PairRecord,
    pub witness: WitnessRecord,
}

/// First 16 hex digits of SHA-256 over the given parts, NUL-separated.
pub(crate) fn digest(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for (k, p) in parts.iter().enumerate() {
        if k > 0 {
            h.update([0u8]);
        }
        h.update(p);
    }
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Writes one compact JSON object per line.
pub fn write_jsonl<T: Serialize, W: Write>(items: &[T], mut out: W) -> std::io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Reads one JSON object per non-blank line.
pub fn read_jsonl<T: DeserializeOwned, R: BufRead>(input: R) -> Result<Vec<T>, PipelineError> {
    let mut out = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line.map_err(|e| PipelineError::Json {
            line: k + 1,
            source: serde_json::Error::io(e),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| PipelineError::Json { line: k + 1, source })?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_json_uses_snake_case_keys() {
        let r = PairRecord {
            id: "x".into(),
            language: "minilang".into(),
            original: "a".into(),
            transformed: "b".into(),
            rule: RuleId::BlockSwap,
            site_span: SiteSpan { start: 1, end: 2 },
            seed: "18446744073709551615".into(),
            auxiliary: BTreeMap::new(),
        };
        let j = serde_json::to_string(&r).unwrap();
        assert_eq!(
            j,
            r#"{"id":"x","language":"minilang","original":"a","transformed":"b","rule":"block-swap","site_span":{"start":1,"end":2},"seed":"18446744073709551615","auxiliary":{}}"#
        );
        let back: PairRecord = serde_json::from_str(&j).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn jsonl_round_trip_skips_blank_lines() {
        let items = vec![serde_json::json!({"a": 1}), serde_json::json!({"a": 2})];
        let mut buf = Vec::new();
        write_jsonl(&items, &mut buf).unwrap();
        buf.extend_from_slice(b"\n\n");
        let back: Vec<serde_json::Value> = read_jsonl(buf.as_slice()).unwrap();
        assert_eq!(back, items);
        let err = read_jsonl::<serde_json::Value, _>(&b"{}\n{oops"[..]).unwrap_err();
        assert!(matches!(err, PipelineError::Json { line: 2, .. }));
    }

    #[test]
    fn digest_separates_parts() {
        assert_ne!(digest(&[b"ab", b"c"]), digest(&[b"a", b"bc"]));
        assert_eq!(digest(&[b"x"]).len(), 16);
    }
}
