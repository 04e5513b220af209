use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::transforms::RuleId;

use super::{PairRecord, PipelineError};

pub const DEFAULT_VALID_FRACTION: f64 = 0.001;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub train_ids: Vec<String>,
    pub valid_ids: Vec<String>,
    pub valid_fraction: f64,
    pub split_seed: u64,
}

/// Validation size for `n` ids: `round(fraction * n)`, at least one.
fn valid_size(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64).round() as usize).clamp(1, n)
}

/// Largest-remainder apportionment of `k` slots across group sizes.
fn apportion(sizes: &[usize], k: usize) -> Vec<usize> {
    let n: usize = sizes.iter().sum();
    let mut quota: Vec<usize> = sizes.iter().map(|&s| s * k / n).collect();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    // Remainder of s * k / n, compared exactly as s * k mod n.
    order.sort_by_key(|&g| std::cmp::Reverse(sizes[g] * k % n));
    let short = k - quota.iter().sum::<usize>();
    for &g in order.iter().take(short) {
        quota[g] += 1;
    }
    quota
}

/// Holds out `round(valid_fraction * N)` ids (at least one), stratified by
/// rule so the held-out set follows the corpus mix as closely as whole ids
/// allow. Ids are shuffled within each rule by `split_seed`; records sharing
/// an id travel together. Both lists keep corpus order.
pub fn split(records: &[PairRecord], valid_fraction: f64, split_seed: u64) -> Result<SplitManifest, PipelineError> {
    if !(0.0..=1.0).contains(&valid_fraction) {
        return Err(PipelineError::InvalidFraction(valid_fraction));
    }
    let mut seen = HashSet::new();
    let ids: Vec<(&str, RuleId)> = records
        .iter()
        .filter(|r| seen.insert(r.id.as_str()))
        .map(|r| (r.id.as_str(), r.rule))
        .collect();
    if ids.is_empty() {
        return Err(PipelineError::EmptyCorpus);
    }
    let mut groups: BTreeMap<RuleId, Vec<&str>> = BTreeMap::new();
    for &(id, rule) in &ids {
        groups.entry(rule).or_default().push(id);
    }
    let sizes: Vec<usize> = groups.values().map(Vec::len).collect();
    let quota = apportion(&sizes, valid_size(ids.len(), valid_fraction));
    let mut rng = ChaCha8Rng::seed_from_u64(split_seed);
    let mut valid = HashSet::new();
    for (group, q) in groups.values_mut().zip(quota) {
        group.shuffle(&mut rng);
        valid.extend(group.iter().take(q).copied());
    }
    let (valid_ids, train_ids): (Vec<&str>, Vec<&str>) = ids.iter().map(|&(id, _)| id).partition(|id| valid.contains(id));
    Ok(SplitManifest {
        train_ids: train_ids.into_iter().map(String::from).collect(),
        valid_ids: valid_ids.into_iter().map(String::from).collect(),
        valid_fraction,
        split_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::SiteSpan;

    fn records(n: usize) -> Vec<PairRecord> {
        (0..n)
            .map(|k| PairRecord {
                id: format!("r{k}"),
                language: "minilang".into(),
                original: String::new(),
                transformed: String::new(),
                rule: RuleId::ALL[k % 3],
                site_span: SiteSpan { start: 0, end: 0 },
                seed: "0".into(),
                auxiliary: BTreeMap::new(),
            })
            .collect()
    }

    #[test]
    fn sizes_and_floor() {
        assert_eq!(split(&records(10_000), 0.001, 0).unwrap().valid_ids.len(), 10);
        assert_eq!(split(&records(5), 0.0, 0).unwrap().valid_ids.len(), 1);
        assert_eq!(split(&records(5), 1.0, 0).unwrap().train_ids.len(), 0);
        assert!(matches!(split(&[], 0.1, 0), Err(PipelineError::EmptyCorpus)));
        assert!(matches!(split(&records(3), 1.5, 0), Err(PipelineError::InvalidFraction(_))));
    }

    #[test]
    fn disjoint_cover_and_seeded() {
        let rs = records(300);
        let m = split(&rs, 0.1, 9).unwrap();
        let v: HashSet<&String> = m.valid_ids.iter().collect();
        assert!(m.train_ids.iter().all(|t| !v.contains(t)));
        assert_eq!(m.train_ids.len() + m.valid_ids.len(), 300);
        assert_eq!(m, split(&rs, 0.1, 9).unwrap());
        assert_ne!(m.valid_ids, split(&rs, 0.1, 10).unwrap().valid_ids);
        // Three equal strata of 100: exactly 10 from each.
        for rule in &RuleId::ALL[..3] {
            let n = rs.iter().filter(|r| r.rule == *rule && v.contains(&r.id)).count();
            assert_eq!(n, 10);
        }
    }

    #[test]
    fn apportion_by_largest_remainder() {
        assert_eq!(apportion(&[5, 3, 2], 5), vec![3, 1, 1]);
        assert_eq!(apportion(&[1, 1, 1], 2), vec![1, 1, 0]);
        assert_eq!(apportion(&[7], 3), vec![3]);
    }

    #[test]
    fn duplicate_ids_count_once() {
        let mut rs = records(4);
        rs.push(rs[0].clone());
        let m = split(&rs, 0.5, 0).unwrap();
        assert_eq!(m.train_ids.len() + m.valid_ids.len(), 4);
    }
}
