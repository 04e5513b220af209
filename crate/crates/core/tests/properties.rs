use std::collections::{BTreeMap, HashSet};

use proptest::prelude::*;

use denat::gen::generate_program;
use denat::metrics::{score, CodeBleuWeights};
use denat::pipeline::{split, PairRecord, SiteSpan};
use denat::syntax::SourceUnit;
use denat::transforms::{apply, RuleConfig, RuleId};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_printing_is_a_fixed_point(seed in any::<u64>()) {
        let u = SourceUnit::parse("p", &generate_program(seed)).unwrap();
        let once = u.canonical();
        prop_assert_eq!(SourceUnit::parse("p", &once).unwrap().canonical(), once);
    }

    #[test]
    fn rewrites_reparse_and_change_the_text(seed in any::<u64>(), op in any::<u64>()) {
        let u = SourceUnit::parse("p", &generate_program(seed)).unwrap();
        let out = apply(&u, &RuleConfig::default(), op).unwrap();
        prop_assert_ne!(out.transformed.canonical(), u.canonical());
        prop_assert_eq!(SourceUnit::parse("t", &out.transformed.text).unwrap().canonical(), out.transformed.canonical());
    }

    #[test]
    fn scores_stay_in_range(a in 0u64..500, b in 0u64..500) {
        let (h, r) = (generate_program(a), generate_program(b));
        let s = score(&h, &r, None, &CodeBleuWeights::default()).unwrap();
        for v in [s.sm, s.dm, s.bleu, s.weighted_bleu, s.codebleu] {
            prop_assert!((0.0..=1.0 + 1e-9).contains(&v));
        }
        prop_assert_eq!(s.exact_match, s.token_edit_distance == 0);
    }

    #[test]
    fn split_partitions_ids(n in 1usize..400, fraction in 0.0f64..=1.0, seed in any::<u64>()) {
        let records: Vec<PairRecord> = (0..n)
            .map(|k| PairRecord {
                id: format!("id{k}"),
                language: "minilang".into(),
                original: String::new(),
                transformed: String::new(),
                rule: RuleId::ALL[k * 7 % 6],
                site_span: SiteSpan { start: 0, end: 0 },
                seed: "0".into(),
                auxiliary: BTreeMap::new(),
            })
            .collect();
        let m = split(&records, fraction, seed).unwrap();
        let valid: HashSet<&String> = m.valid_ids.iter().collect();
        prop_assert!(m.train_ids.iter().all(|t| !valid.contains(t)));
        prop_assert_eq!(m.train_ids.len() + m.valid_ids.len(), n);
        prop_assert_eq!(m.valid_ids.len(), ((fraction * n as f64).round() as usize).clamp(1, n));
    }
}
