//! The six de-naturalizing rewrites and the engine that picks one per unit.
//!
//! Every rule works the same way: locate candidate sites in the parsed unit,
//! rebuild an owned [`Tree`] with the site rewritten, print it canonically
//! and re-parse the result. A rewrite that does not re-parse, or that leaves
//! the text unchanged, is an error rather than an outcome.
//!
//! ```
//! use denat::syntax::SourceUnit;
//! use denat::transforms::{apply, RuleConfig};
//!
//! let unit = SourceUnit::parse("demo", "int f(int n) { int s = 0; while (s < n) { s += 2; } return s; }").unwrap();
//! let out = apply(&unit, &RuleConfig::default(), 11).unwrap();
//! assert_ne!(out.transformed.canonical(), unit.canonical());
//! ```

mod confusion;
mod dead_code;
#[doc(hidden)]
pub mod fault;
mod loops;
mod rename;
mod swaps;

pub use confusion::confusion_insert;
pub use dead_code::{inject_dead_code, inject_dead_code_with, GuardForm};
pub use loops::loop_exchange;
pub use rename::{rename_chains, var_rename};
pub use swaps::{block_swap, negate_condition, operand_swap};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataflow::{build_def_use, DataflowError, DefUseGraph, Visibility};
use crate::syntax::{NodeId, SourceUnit, SyntaxError, Tree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleId {
    LoopExchange,
    DeadCode,
    BlockSwap,
    OperandSwap,
    ConfusionInsert,
    VarRename,
}

impl RuleId {
    pub const ALL: [RuleId; 6] = [
        RuleId::LoopExchange,
        RuleId::DeadCode,
        RuleId::BlockSwap,
        RuleId::OperandSwap,
        RuleId::ConfusionInsert,
        RuleId::VarRename,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleId::LoopExchange => "loop-exchange",
            RuleId::DeadCode => "dead-code",
            RuleId::BlockSwap => "block-swap",
            RuleId::OperandSwap => "operand-swap",
            RuleId::ConfusionInsert => "confusion-insert",
            RuleId::VarRename => "var-rename",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RuleId {
    type Err = TransformError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = s.trim().to_ascii_lowercase().replace('_', "-");
        RuleId::ALL
            .into_iter()
            .find(|r| r.name() == wanted)
            .ok_or_else(|| TransformError::UnknownRule(s.to_string()))
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum TransformError {
    #[error("no enabled rule applies to this unit")]
    NoApplicableRule,
    #[error("node {0} is not a for or while loop")]
    NotALoopSite(NodeId),
    #[error("no statement can be transplanted to node {0}")]
    NoDonorStatement(NodeId),
    #[error("node {0} is not an if statement with an else branch")]
    NoElseBranch(NodeId),
    #[error("operands at node {0} cannot be swapped")]
    IneligibleOperator(NodeId),
    #[error("node {0} matches neither confusing-code pattern")]
    PatternMismatch(NodeId),
    #[error("function at node {0} has no variable to rename")]
    NothingToRename(NodeId),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("invalid rule configuration: {0}")]
    InvalidConfig(String),
    #[error("{0} left the unit unchanged")]
    Vacuous(RuleId),
    #[error("rewritten unit does not parse: {0}")]
    Reparse(#[from] SyntaxError),
    #[error(transparent)]
    Dataflow(#[from] DataflowError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleConfig {
    /// Share of a function's variables renamed by [`RuleId::VarRename`].
    pub rename_fraction: f64,
    pub dead_guard_forms: Vec<GuardForm>,
    pub rules_enabled: BTreeSet<RuleId>,
    /// Renamed variables become `{var_prefix}{k}`.
    pub var_prefix: String,
    /// Let loops and conditionals serve as dead-code donors.
    pub allow_compound_donors: bool,
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig {
            rename_fraction: 0.5,
            dead_guard_forms: vec![GuardForm::IfLess, GuardForm::WhileNotEqual],
            rules_enabled: RuleId::ALL.into_iter().collect(),
            var_prefix: "VAR_".to_string(),
            allow_compound_donors: false,
        }
    }
}

impl RuleConfig {
    pub fn only(rule: RuleId) -> Self {
        RuleConfig {
            rules_enabled: [rule].into_iter().collect(),
            ..RuleConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), TransformError> {
        if !(self.rename_fraction > 0.0 && self.rename_fraction <= 1.0) {
            return Err(TransformError::InvalidConfig(format!(
                "rename fraction {} is outside (0, 1]",
                self.rename_fraction
            )));
        }
        if self.rules_enabled.is_empty() {
            return Err(TransformError::InvalidConfig("no rule enabled".into()));
        }
        if self.dead_guard_forms.is_empty() {
            return Err(TransformError::InvalidConfig("no dead-code guard form".into()));
        }
        let p = &self.var_prefix;
        let valid_start = p.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
        if !valid_start || !p.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(TransformError::InvalidConfig(format!("`{p}` is not an identifier prefix")));
        }
        Ok(())
    }
}

/// One applied rewrite. `site` is a node of `original`.
#[derive(Clone, Debug)]
pub struct TransformOutcome {
    pub rule: RuleId,
    pub site: NodeId,
    pub original: SourceUnit,
    pub transformed: SourceUnit,
    pub seed: u64,
    pub auxiliary: BTreeMap<String, String>,
}

/// Facts about a unit that several rules need.
pub(crate) struct Analysis<'u> {
    pub unit: &'u SourceUnit,
    pub parents: Vec<Option<NodeId>>,
    pub vis: Visibility,
    pub graph: DefUseGraph,
}

impl<'u> Analysis<'u> {
    pub fn new(unit: &'u SourceUnit) -> Result<Self, TransformError> {
        Ok(Analysis {
            unit,
            parents: unit.ast.parents(),
            vis: Visibility::compute(&unit.ast),
            graph: build_def_use(&unit.ast)?,
        })
    }

    pub fn parent(&self, n: NodeId) -> Option<NodeId> {
        self.parents[n.index()]
    }

    /// Canonical text of the subtree at `n`.
    pub fn text_of(&self, n: NodeId) -> String {
        crate::syntax::print_tree(&self.unit.ast.to_tree(n))
    }

    /// Prints and re-parses a rewritten tree.
    pub fn finish(
        &self,
        rule: RuleId,
        site: NodeId,
        seed: u64,
        tree: &Tree,
        auxiliary: BTreeMap<String, String>,
    ) -> Result<TransformOutcome, TransformError> {
        let transformed = SourceUnit::from_tree(self.unit.name(), tree)?;
        if transformed.canonical() == self.unit.canonical() {
            return Err(TransformError::Vacuous(rule));
        }
        Ok(TransformOutcome {
            rule,
            site,
            original: self.unit.clone(),
            transformed,
            seed,
            auxiliary,
        })
    }
}

/// Sites for `rule` under the default configuration, in source order.
pub fn find_sites(unit: &SourceUnit, rule: RuleId) -> Vec<NodeId> {
    find_sites_with(unit, rule, &RuleConfig::default())
}

pub fn find_sites_with(unit: &SourceUnit, rule: RuleId, config: &RuleConfig) -> Vec<NodeId> {
    match Analysis::new(unit) {
        Ok(an) => sites(&an, rule, config),
        Err(_) => Vec::new(),
    }
}

pub(crate) fn sites(an: &Analysis, rule: RuleId, config: &RuleConfig) -> Vec<NodeId> {
    let mut out = match rule {
        RuleId::LoopExchange => loops::sites(an),
        RuleId::DeadCode => dead_code::sites(an, config),
        RuleId::BlockSwap => swaps::block_sites(an),
        RuleId::OperandSwap => swaps::operand_sites(an),
        RuleId::ConfusionInsert => confusion::sites(an),
        RuleId::VarRename => rename::sites(an, config),
    };
    let ast = &an.unit.ast;
    out.sort_by_key(|&n| (ast.node(n).span.start, std::cmp::Reverse(ast.node(n).span.end)));
    out
}

/// Applies `rule` at `site`, drawing any rule-specific choices from `seed`.
pub fn apply_rule(
    unit: &SourceUnit,
    rule: RuleId,
    site: NodeId,
    config: &RuleConfig,
    seed: u64,
) -> Result<TransformOutcome, TransformError> {
    let an = Analysis::new(unit)?;
    apply_at(&an, rule, site, config, seed)
}

fn apply_at(
    an: &Analysis,
    rule: RuleId,
    site: NodeId,
    config: &RuleConfig,
    seed: u64,
) -> Result<TransformOutcome, TransformError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match rule {
        RuleId::LoopExchange => loops::apply(an, site, seed),
        RuleId::DeadCode => dead_code::apply(an, site, config, seed, &mut rng),
        RuleId::BlockSwap => swaps::apply_block(an, site, seed),
        RuleId::OperandSwap => swaps::apply_operand(an, site, seed),
        RuleId::ConfusionInsert => confusion::apply(an, site, seed),
        RuleId::VarRename => rename::apply(an, site, config, seed, &mut rng),
    }
}

fn applicable(an: &Analysis, config: &RuleConfig) -> Vec<(RuleId, Vec<NodeId>)> {
    config
        .rules_enabled
        .iter()
        .map(|&r| (r, sites(an, r, config)))
        .filter(|(_, s)| !s.is_empty())
        .collect()
}

struct Pick {
    rule_index: usize,
    site: NodeId,
    op_seed: u64,
}

fn pick(candidates: &[(RuleId, Vec<NodeId>)], rng: &mut ChaCha8Rng) -> Pick {
    let rule_index = rng.gen_range(0..candidates.len());
    let sites = &candidates[rule_index].1;
    let site = sites[rng.gen_range(0..sites.len())];
    Pick {
        rule_index,
        site,
        op_seed: rng.gen(),
    }
}

/// Uniform choice of an applicable rule, then of one of its sites.
pub fn select_rule(unit: &SourceUnit, config: &RuleConfig, seed: u64) -> Result<(RuleId, NodeId), TransformError> {
    config.validate()?;
    let an = Analysis::new(unit)?;
    let candidates = applicable(&an, config);
    if candidates.is_empty() {
        return Err(TransformError::NoApplicableRule);
    }
    let p = pick(&candidates, &mut ChaCha8Rng::seed_from_u64(seed));
    Ok((candidates[p.rule_index].0, p.site))
}

/// Applies exactly one rule. If the chosen rule fails at its site the engine
/// drops that rule and draws again from the same stream; the rules it gave
/// up on are listed under `fallback_from`.
pub fn apply(unit: &SourceUnit, config: &RuleConfig, seed: u64) -> Result<TransformOutcome, TransformError> {
    config.validate()?;
    let an = Analysis::new(unit)?;
    let mut candidates = applicable(&an, config);
    if candidates.is_empty() {
        return Err(TransformError::NoApplicableRule);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failed: Vec<RuleId> = Vec::new();
    while !candidates.is_empty() {
        let p = pick(&candidates, &mut rng);
        let rule = candidates[p.rule_index].0;
        match apply_at(&an, rule, p.site, config, p.op_seed) {
            Ok(mut out) => {
                out.seed = seed;
                if !failed.is_empty() {
                    let names: Vec<&str> = failed.iter().map(|r| r.name()).collect();
                    out.auxiliary.insert("fallback_from".into(), names.join(","));
                }
                return Ok(out);
            }
            Err(_) => {
                failed.push(rule);
                candidates.remove(p.rule_index);
            }
        }
    }
    Err(TransformError::NoApplicableRule)
}

/// Copy of `t` with every origin link cleared.
pub(crate) fn detached(mut t: Tree) -> Tree {
    fn clear(t: &mut Tree) {
        t.origin = None;
        t.children.iter_mut().for_each(clear);
    }
    clear(&mut t);
    t
}

pub(crate) fn aux<const N: usize>(pairs: [(&str, String); N]) -> BTreeMap<String, String> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}
