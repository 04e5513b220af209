use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::metrics::{bucket_report, copy_analysis, lexemes, score, write_bucket_csv, BucketRow, CodeBleuWeights, CopyStats, MetricReport, MetricsError};
use crate::transforms::RuleId;

use super::{PairRecord, PipelineError};

/// One model output, keyed by the id of the pair it answers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub id: String,
    pub hypothesis: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoredPair {
    pub id: String,
    pub rule: RuleId,
    pub report: MetricReport,
}

/// Corpus means over every scored pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub em_rate: f64,
    pub sm: f64,
    pub dm: f64,
    pub bleu: f64,
    pub weighted_bleu: f64,
    pub codebleu: f64,
    pub copy_rate: f64,
    pub median_edit_distance: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evaluation {
    pub pairs: Vec<ScoredPair>,
    pub buckets: Vec<BucketRow>,
    pub copy: CopyStats,
    pub summary: Summary,
}

impl Evaluation {
    /// The per-rule table as CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), MetricsError> {
        write_bucket_csv(&self.buckets, out)
    }
}

fn check_alignment(pairs: &[PairRecord], hyps: &[Hypothesis]) -> Result<(), PipelineError> {
    if pairs.len() != hyps.len() {
        return Err(PipelineError::AlignmentLength {
            pairs: pairs.len(),
            hyps: hyps.len(),
        });
    }
    match pairs.iter().zip(hyps).position(|(p, h)| p.id != h.id) {
        Some(index) => Err(PipelineError::Alignment {
            index,
            expected: pairs[index].id.clone(),
            found: hyps[index].id.clone(),
        }),
        None => Ok(()),
    }
}

/// Scores each hypothesis against the `original` of the pair at the same
/// position; the pair's `transformed` text is the model input used for copy
/// detection. Hypotheses must be in pair order with matching ids.
pub fn evaluate(pairs: &[PairRecord], hyps: &[Hypothesis], weights: &CodeBleuWeights) -> Result<Evaluation, PipelineError> {
    check_alignment(pairs, hyps)?;
    if pairs.is_empty() {
        return Err(PipelineError::EmptyCorpus);
    }
    let reports: Vec<MetricReport> = pairs
        .par_iter()
        .zip(hyps)
        .map(|(p, h)| {
            score(&h.hypothesis, &p.original, Some(&p.transformed), weights).map_err(|e| PipelineError::BadRecord {
                id: p.id.clone(),
                message: e.to_string(),
            })
        })
        .collect::<Result<_, _>>()?;
    let copy_pairs: Vec<(Vec<String>, Vec<String>)> = pairs
        .iter()
        .zip(hyps)
        .map(|(p, h)| (lexemes(&p.transformed), lexemes(&h.hypothesis)))
        .collect();
    let copy = copy_analysis(&copy_pairs)?;

    let n = reports.len() as f64;
    let mean = |f: fn(&MetricReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    let summary = Summary {
        count: reports.len(),
        em_rate: mean(|r| f64::from(u8::from(r.exact_match))),
        sm: mean(|r| r.sm),
        dm: mean(|r| r.dm),
        bleu: mean(|r| r.bleu),
        weighted_bleu: mean(|r| r.weighted_bleu),
        codebleu: mean(|r| r.codebleu),
        copy_rate: copy.copy_rate,
        median_edit_distance: copy.median_edit_distance,
    };
    let by_rule: Vec<(RuleId, MetricReport)> = pairs.iter().map(|p| p.rule).zip(reports.iter().cloned()).collect();
    let pairs = pairs
        .iter()
        .zip(reports)
        .map(|(p, report)| ScoredPair {
            id: p.id.clone(),
            rule: p.rule,
            report,
        })
        .collect();
    Ok(Evaluation {
        pairs,
        buckets: bucket_report(&by_rule),
        copy,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{generate_pairs, GenerateOptions};
    use crate::syntax::SourceUnit;

    fn corpus() -> Vec<PairRecord> {
        let units: Vec<SourceUnit> = (0..8)
            .map(|s| SourceUnit::parse("t", &crate::gen::generate_program(s)).unwrap())
            .collect();
        generate_pairs(&units, &GenerateOptions::default()).unwrap().records
    }

    fn hyps(pairs: &[PairRecord], pick: fn(&PairRecord) -> &str) -> Vec<Hypothesis> {
        pairs
            .iter()
            .map(|p| Hypothesis {
                id: p.id.clone(),
                hypothesis: pick(p).to_string(),
            })
            .collect()
    }

    #[test]
    fn perfect_and_copying_models() {
        let pairs = corpus();
        let w = CodeBleuWeights::default();
        let perfect = evaluate(&pairs, &hyps(&pairs, |p| &p.original), &w).unwrap();
        assert_eq!(perfect.summary.em_rate, 1.0);
        assert_eq!(perfect.summary.codebleu, 1.0);
        assert_eq!(perfect.summary.copy_rate, 0.0);

        let copier = evaluate(&pairs, &hyps(&pairs, |p| &p.transformed), &w).unwrap();
        assert_eq!(copier.summary.em_rate, 0.0);
        assert_eq!(copier.summary.copy_rate, 1.0);
        assert_eq!(copier.summary.median_edit_distance, 0);
        assert!(copier.pairs.iter().all(|p| p.report.is_copy));
        let total: usize = copier.buckets.iter().map(|b| b.count).sum();
        assert_eq!(total, pairs.len());
    }

    #[test]
    fn misaligned_hypotheses_are_rejected() {
        let pairs = corpus();
        let w = CodeBleuWeights::default();
        let mut h = hyps(&pairs, |p| &p.original);
        h.swap(0, 1);
        assert!(matches!(evaluate(&pairs, &h, &w), Err(PipelineError::Alignment { index: 0, .. })));
        h.pop();
        assert!(matches!(evaluate(&pairs, &h, &w), Err(PipelineError::AlignmentLength { .. })));
    }

    #[test]
    fn csv_has_one_row_per_rule() {
        let pairs = corpus();
        let e = evaluate(&pairs, &hyps(&pairs, |p| &p.original), &CodeBleuWeights::default()).unwrap();
        let mut buf = Vec::new();
        e.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), e.buckets.len() + 1);
        assert!(text.starts_with("rule,count,em_rate"));
    }
}
