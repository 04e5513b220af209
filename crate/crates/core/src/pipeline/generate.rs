use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::interp::{entry_points, equivalent, Verdict};
use crate::syntax::{SourceUnit, LANGUAGE};
use crate::transforms::{apply, find_sites_with, RuleConfig, TransformError, TransformOutcome};

use super::{digest, PairRecord, PipelineError, RejectRecord, WitnessRecord};

#[derive(Clone, Debug, PartialEq)]
pub struct GenerateOptions {
    pub config: RuleConfig,
    pub master_seed: u64,
    /// Equivalence trials per entry point.
    pub trials: usize,
    /// Drop units whose canonical text was already seen.
    pub dedup: bool,
    /// One record for every applicable enabled rule instead of one per unit.
    pub per_rule: bool,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions {
            config: RuleConfig::default(),
            master_seed: 0,
            trials: 16,
            dedup: false,
            per_rule: false,
            jobs: None,
        }
    }
}

/// Unit counters. `units` equals the sum of the other unit counters.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GenerateReport {
    pub units: usize,
    /// Units that produced at least one record.
    pub emitted: usize,
    pub no_rule: usize,
    /// Units whose every rewrite diverged from the original.
    pub quarantined: usize,
    pub duplicates: usize,
    /// Units the transform engine or the interpreter could not handle.
    pub failed: usize,
    pub records: usize,
    pub rejects: usize,
    /// Records whose trials all ran out of fuel on both sides.
    pub inconclusive: usize,
}

#[derive(Clone, Debug, Default)]
pub struct GenerateOutput {
    pub records: Vec<PairRecord>,
    pub rejects: Vec<RejectRecord>,
    pub report: GenerateReport,
}

/// Seed for one unit: the master seed hashed with the unit's canonical text.
pub fn unit_seed(master_seed: u64, canonical: &str) -> u64 {
    let hex = digest(&[master_seed.to_string().as_bytes(), canonical.as_bytes()]);
    u64::from_str_radix(&hex, 16).expect("digest is 16 hex digits")
}

enum Gate {
    Pass { inconclusive: bool },
    Reject(WitnessRecord),
    Error,
}

fn gate(outcome: &TransformOutcome, trials: usize) -> Gate {
    let mut inconclusive = false;
    for entry in entry_points(&outcome.original) {
        match equivalent(&outcome.original, &outcome.transformed, &entry, trials, outcome.seed) {
            Ok(Verdict::Equivalent) => {}
            Ok(Verdict::Inconclusive { .. }) => inconclusive = true,
            Ok(Verdict::Divergent(w)) => return Gate::Reject(WitnessRecord::new(&entry, &w)),
            Err(_) => return Gate::Error,
        }
    }
    Gate::Pass { inconclusive }
}

fn record(outcome: &TransformOutcome, with_rule: bool) -> PairRecord {
    let original = outcome.original.text.clone();
    let seed = outcome.seed.to_string();
    let id = if with_rule {
        digest(&[original.as_bytes(), seed.as_bytes(), outcome.rule.name().as_bytes()])
    } else {
        digest(&[original.as_bytes(), seed.as_bytes()])
    };
    PairRecord {
        id,
        language: LANGUAGE.to_string(),
        transformed: outcome.transformed.text.clone(),
        rule: outcome.rule,
        site_span: outcome.original.ast.node(outcome.site).span.into(),
        seed,
        auxiliary: outcome.auxiliary.clone(),
        original,
    }
}

#[derive(Default)]
struct UnitResult {
    records: Vec<PairRecord>,
    rejects: Vec<RejectRecord>,
    inconclusive: usize,
    no_rule: bool,
    failed: bool,
}

fn process(unit: &SourceUnit, opts: &GenerateOptions) -> UnitResult {
    let unit = unit.canonicalized();
    let seed = unit_seed(opts.master_seed, &unit.text);
    let mut out = UnitResult::default();
    let configs: Vec<RuleConfig> = if opts.per_rule {
        opts.config
            .rules_enabled
            .iter()
            .filter(|&&r| !find_sites_with(&unit, r, &opts.config).is_empty())
            .map(|&r| RuleConfig {
                rules_enabled: [r].into_iter().collect(),
                ..opts.config.clone()
            })
            .collect()
    } else {
        vec![opts.config.clone()]
    };
    for config in &configs {
        let outcome = match apply(&unit, config, seed) {
            Ok(o) => o,
            Err(TransformError::NoApplicableRule) => continue,
            Err(_) => {
                out.failed = true;
                continue;
            }
        };
        let rec = record(&outcome, opts.per_rule);
        match gate(&outcome, opts.trials) {
            Gate::Pass { inconclusive } => {
                out.inconclusive += usize::from(inconclusive);
                out.records.push(rec);
            }
            Gate::Reject(witness) => out.rejects.push(RejectRecord { record: rec, witness }),
            Gate::Error => out.failed = true,
        }
    }
    out.no_rule = out.records.is_empty() && out.rejects.is_empty() && !out.failed;
    out
}

/// Rewrites each unit once (or once per applicable rule) and keeps the pairs
/// that pass the equivalence gate; the others go to the reject stream with
/// the input that told them apart. Output order follows `units`.
pub fn generate_pairs(units: &[SourceUnit], opts: &GenerateOptions) -> Result<GenerateOutput, PipelineError> {
    opts.config.validate()?;
    let mut seen = HashSet::new();
    let mut report = GenerateReport {
        units: units.len(),
        ..GenerateReport::default()
    };
    let work: Vec<&SourceUnit> = units
        .iter()
        .filter(|u| {
            let fresh = !opts.dedup || seen.insert(u.canonical());
            report.duplicates += usize::from(!fresh);
            fresh
        })
        .collect();
    let run = || work.par_iter().map(|u| process(u, opts)).collect::<Vec<_>>();
    let results = match opts.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| PipelineError::Workers(e.to_string()))?
            .install(run),
        None => run(),
    };
    let mut out = GenerateOutput::default();
    for r in results {
        if !r.records.is_empty() {
            report.emitted += 1;
        } else if r.failed {
            report.failed += 1;
        } else if !r.rejects.is_empty() {
            report.quarantined += 1;
        } else {
            report.no_rule += 1;
        }
        report.inconclusive += r.inconclusive;
        out.records.extend(r.records);
        out.rejects.extend(r.rejects);
    }
    report.records = out.records.len();
    report.rejects = out.rejects.len();
    out.report = report;
    Ok(out)
}

/// A stored pair that no longer checks out.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditFinding {
    pub id: String,
    /// Why the pair failed; `None` when a witness was found.
    pub error: Option<String>,
    pub witness: Option<WitnessRecord>,
}

/// Re-runs the equivalence check on existing records.
pub fn audit(records: &[PairRecord], trials: usize) -> Vec<AuditFinding> {
    let check = |r: &PairRecord| -> Option<AuditFinding> {
        let finding = |error: Option<String>, witness| Some(AuditFinding { id: r.id.clone(), error, witness });
        let seed: u64 = match r.seed.parse() {
            Ok(s) => s,
            Err(_) => return finding(Some(format!("seed `{}` is not a u64", r.seed)), None),
        };
        let a = match SourceUnit::parse("original", &r.original) {
            Ok(u) => u,
            Err(e) => return finding(Some(format!("original: {e}")), None),
        };
        let b = match SourceUnit::parse("transformed", &r.transformed) {
            Ok(u) => u,
            Err(e) => return finding(Some(format!("transformed: {e}")), None),
        };
        for entry in entry_points(&a) {
            match equivalent(&a, &b, &entry, trials, seed) {
                Ok(Verdict::Divergent(w)) => return finding(None, Some(WitnessRecord::new(&entry, &w))),
                Ok(_) => {}
                Err(e) => return finding(Some(e.to_string()), None),
            }
        }
        None
    };
    records.par_iter().filter_map(check).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::RuleId;

    fn unit(src: &str) -> SourceUnit {
        SourceUnit::parse("t", src).unwrap()
    }

    const LOOP: &str = "int f(int n) { int s = 0; for (int i = 0; i < n; i++) { s += i; } return s; }";

    #[test]
    fn conservation_and_no_rule() {
        let units = vec![unit(LOOP), unit("int g() { return 1; }")];
        let out = generate_pairs(&units, &GenerateOptions::default()).unwrap();
        let r = &out.report;
        assert_eq!(r.units, 2);
        assert_eq!(r.emitted, 1);
        assert_eq!(r.no_rule, 1);
        assert_eq!(r.units, r.emitted + r.no_rule + r.quarantined + r.duplicates + r.failed);
        let rec = &out.records[0];
        assert_ne!(rec.original, rec.transformed);
        assert!(SourceUnit::parse("t", &rec.transformed).is_ok());
        assert_eq!(rec.original, unit(LOOP).canonical());
    }

    #[test]
    fn deterministic_across_worker_counts() {
        let units: Vec<SourceUnit> = (0..20).map(|s| unit(&crate::gen::generate_program(s))).collect();
        let one = generate_pairs(&units, &GenerateOptions { jobs: Some(1), ..Default::default() }).unwrap();
        let many = generate_pairs(&units, &GenerateOptions { jobs: Some(4), ..Default::default() }).unwrap();
        assert_eq!(one.records, many.records);
        assert_eq!(one.report, many.report);
        assert_eq!(one.records.len(), 20);
    }

    #[test]
    fn dedup_and_per_rule() {
        let units = vec![unit(LOOP), unit(LOOP)];
        let plain = generate_pairs(&units, &GenerateOptions::default()).unwrap();
        assert_eq!(plain.records.len(), 2);
        let dedup = generate_pairs(&units, &GenerateOptions { dedup: true, ..Default::default() }).unwrap();
        assert_eq!(dedup.records.len(), 1);
        assert_eq!(dedup.report.duplicates, 1);
        let per = generate_pairs(&units[..1], &GenerateOptions { per_rule: true, ..Default::default() }).unwrap();
        let rules: Vec<RuleId> = per.records.iter().map(|r| r.rule).collect();
        assert!(rules.len() >= 3, "{rules:?}");
        let ids: HashSet<&String> = per.records.iter().map(|r| &r.id).collect();
        assert_eq!(ids.len(), rules.len());
    }

    #[test]
    fn audit_flags_a_corrupted_record() {
        let units = vec![unit(LOOP)];
        let mut out = generate_pairs(&units, &GenerateOptions::default()).unwrap();
        assert!(audit(&out.records, 16).is_empty());
        out.records[0].transformed = "int f(int n) { return n; }".into();
        let found = audit(&out.records, 16);
        assert_eq!(found.len(), 1);
        assert!(found[0].witness.is_some());
    }

    #[test]
    fn seed_depends_on_master_and_content() {
        assert_ne!(unit_seed(0, "a"), unit_seed(1, "a"));
        assert_ne!(unit_seed(0, "a"), unit_seed(0, "b"));
        assert_eq!(unit_seed(7, "a"), unit_seed(7, "a"));
    }
}
