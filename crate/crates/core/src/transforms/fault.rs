//! Deliberately broken rule variants. They exist to show that the
//! equivalence checker notices when a rewrite changes behaviour.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::syntax::{NodeId, NodeKind, SourceUnit, Tree};

use super::{confusion, dead_code, loops, rename, swaps, Analysis, RuleConfig, RuleId, TransformError, TransformOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Fault {
    /// Block swap that keeps the original condition.
    NegationDropped,
    /// For-to-while that forgets the update before `continue`.
    ContinueUpdateMissing,
    /// Dead code behind `X <= X`, which always holds.
    SatisfiableGuard,
    /// Operand swap that keeps `<` as `<`.
    OperandNotMirrored,
    /// Renaming that misses the last occurrence of a variable.
    RenameMissesOccurrence,
    /// Ternary introduction with the arms exchanged.
    TernaryArmsSwapped,
}

impl Fault {
    pub const ALL: [Fault; 6] = [
        Fault::NegationDropped,
        Fault::ContinueUpdateMissing,
        Fault::SatisfiableGuard,
        Fault::OperandNotMirrored,
        Fault::RenameMissesOccurrence,
        Fault::TernaryArmsSwapped,
    ];

    pub fn rule(self) -> RuleId {
        match self {
            Fault::NegationDropped => RuleId::BlockSwap,
            Fault::ContinueUpdateMissing => RuleId::LoopExchange,
            Fault::SatisfiableGuard => RuleId::DeadCode,
            Fault::OperandNotMirrored => RuleId::OperandSwap,
            Fault::RenameMissesOccurrence => RuleId::VarRename,
            Fault::TernaryArmsSwapped => RuleId::ConfusionInsert,
        }
    }

    /// Sites where the broken variant differs from the correct rule.
    pub fn sites(self, unit: &SourceUnit) -> Vec<NodeId> {
        let Ok(an) = Analysis::new(unit) else {
            return Vec::new();
        };
        let config = RuleConfig::default();
        let ast = &unit.ast;
        let all = super::sites(&an, self.rule(), &config);
        all.into_iter()
            .filter(|&n| match self {
                Fault::NegationDropped | Fault::SatisfiableGuard => true,
                Fault::ContinueUpdateMissing => {
                    ast.kind(n) == NodeKind::For && ast.for_parts(n).update.is_some() && has_bound_continue(unit, n)
                }
                Fault::OperandNotMirrored => {
                    let kids = ast.children(n);
                    matches!(ast.node(n).text(), Some("<" | "<=" | ">" | ">="))
                        && an.text_of(kids[0]) != an.text_of(kids[1])
                }
                Fault::RenameMissesOccurrence => !repeated(&an, n, &config).is_empty(),
                Fault::TernaryArmsSwapped => ast.kind(n) == NodeKind::If,
            })
            .collect()
    }

    pub fn apply(self, unit: &SourceUnit, site: NodeId, seed: u64) -> Result<TransformOutcome, TransformError> {
        let an = Analysis::new(unit)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let config = RuleConfig::default();
        match self {
            Fault::NegationDropped => swaps::apply_block_with(&an, site, seed, |c| c),
            Fault::ContinueUpdateMissing => {
                let replacement = loops::for_to_while_with(&an, site, false);
                let mut tree = unit.ast.tree();
                tree.splice(site, &mut |_| replacement.clone());
                an.finish(RuleId::LoopExchange, site, seed, &tree, Default::default())
            }
            Fault::SatisfiableGuard => {
                let (donor, _, operand) = dead_code::choose(&an, site, &config, &mut rng)?;
                dead_code::insert(&an, site, donor, seed, |d: Tree| {
                    dead_code::guarded(NodeKind::If, "<=", &operand, d)
                })
            }
            Fault::OperandNotMirrored => swaps::apply_operand_with(&an, site, seed, false),
            Fault::RenameMissesOccurrence => {
                let pool = repeated(&an, site, &config);
                let pick = *pool.choose(&mut rng).ok_or(TransformError::NothingToRename(site))?;
                rename::rename(&an, site, &[pick], &config.var_prefix, seed, true)
            }
            Fault::TernaryArmsSwapped => confusion::apply_with(&an, site, seed, true),
        }
    }
}

/// Renameable chains with at least two occurrences.
fn repeated(an: &Analysis, f: NodeId, config: &RuleConfig) -> Vec<NodeId> {
    if an.unit.ast.kind(f) != NodeKind::Function {
        return Vec::new();
    }
    rename::candidates(an, f, config)
        .into_iter()
        .filter(|c| c.occurrences.len() >= 2)
        .map(|c| c.decl)
        .collect()
}

fn has_bound_continue(unit: &SourceUnit, for_loop: NodeId) -> bool {
    fn walk(unit: &SourceUnit, n: NodeId) -> bool {
        match unit.ast.kind(n) {
            NodeKind::Continue => true,
            NodeKind::For | NodeKind::While => false,
            _ => unit.ast.children(n).iter().any(|&c| walk(unit, c)),
        }
    }
    walk(unit, unit.ast.for_parts(for_loop).body)
}
