use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataflow::free_vars;
use crate::syntax::{print_tree, NodeId, NodeKind, SourceUnit, Tree, Type};

use super::{aux, detached, Analysis, RuleConfig, RuleId, TransformError, TransformOutcome};

/// Unsatisfiable wrappers for transplanted statements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GuardForm {
    /// `if ( X < X ) { S }`
    IfLess,
    /// `while ( X != X ) { S }`
    WhileNotEqual,
}

impl GuardForm {
    fn build(self, operand: &str, donor: Tree) -> Tree {
        match self {
            GuardForm::IfLess => guarded(NodeKind::If, "<", operand, donor),
            GuardForm::WhileNotEqual => guarded(NodeKind::While, "!=", operand, donor),
        }
    }
}

fn operand_tree(operand: &str) -> Tree {
    match operand.parse::<i64>() {
        Ok(v) => Tree::int(v),
        Err(_) => Tree::ident(operand),
    }
}

pub(crate) fn guarded(kind: NodeKind, op: &str, operand: &str, donor: Tree) -> Tree {
    let cond = Tree::binary(op, operand_tree(operand), operand_tree(operand));
    Tree::new(kind, vec![cond, Tree::block(vec![donor])])
}

/// Statements that may be copied: no declarations and no jumps anywhere
/// inside. Only expression statements unless compound donors are enabled.
fn donor_ok(an: &Analysis, n: NodeId, config: &RuleConfig) -> bool {
    let ast = &an.unit.ast;
    match ast.kind(n) {
        NodeKind::ExprStmt => true,
        NodeKind::If | NodeKind::While | NodeKind::For | NodeKind::Block if config.allow_compound_donors => {
            ast.preorder(n).into_iter().all(|d| {
                !matches!(
                    ast.kind(d),
                    NodeKind::DeclStmt | NodeKind::Return | NodeKind::Break | NodeKind::Continue
                )
            })
        }
        _ => false,
    }
}

fn enclosing_function(an: &Analysis, mut n: NodeId) -> Option<NodeId> {
    while an.unit.ast.kind(n) != NodeKind::Function {
        n = an.parent(n)?;
    }
    Some(n)
}

/// Statements of the site's function whose free variables are all visible
/// just before the site.
fn donors_for(an: &Analysis, site: NodeId, config: &RuleConfig) -> Vec<NodeId> {
    let ast = &an.unit.ast;
    let Some(f) = enclosing_function(an, site) else {
        return Vec::new();
    };
    let visible = an.vis.before(site);
    ast.preorder(ast.children(f)[1])
        .into_iter()
        .filter(|&d| donor_ok(an, d, config))
        .filter(|&d| free_vars(ast, d).iter().all(|v| visible.iter().any(|w| &w.name == v)))
        .collect()
}

fn is_boundary(an: &Analysis, n: NodeId) -> bool {
    let ast = &an.unit.ast;
    ast.kind(n).is_statement()
        && an
            .parent(n)
            .is_some_and(|p| ast.kind(p) == NodeKind::Block && enclosing_function(an, p).is_some())
}

pub(crate) fn sites(an: &Analysis, config: &RuleConfig) -> Vec<NodeId> {
    let ast = &an.unit.ast;
    ast.preorder(ast.root)
        .into_iter()
        .filter(|&n| is_boundary(an, n) && !donors_for(an, n, config).is_empty())
        .collect()
}

/// Guard operands: visible `int` variables and the literal `0`.
fn guard_operands(an: &Analysis, site: NodeId) -> Vec<String> {
    let mut out: Vec<String> = an
        .vis
        .before(site)
        .iter()
        .filter(|v| v.ty == Type::Int)
        .map(|v| v.name.clone())
        .collect();
    out.push("0".to_string());
    out
}

/// Copies a statement of the same function, wrapped in a guard that can
/// never hold, in front of the statement at `site`.
pub fn inject_dead_code(
    unit: &SourceUnit,
    site: NodeId,
    config: &RuleConfig,
    seed: u64,
) -> Result<TransformOutcome, TransformError> {
    apply(&Analysis::new(unit)?, site, config, seed, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub(crate) fn apply(
    an: &Analysis,
    site: NodeId,
    config: &RuleConfig,
    seed: u64,
    rng: &mut ChaCha8Rng,
) -> Result<TransformOutcome, TransformError> {
    let (donor, form, operand) = choose(an, site, config, rng)?;
    insert(an, site, donor, seed, |d| form.build(&operand, d))
}

/// Seeded choice of donor, guard form and guard operand.
pub(crate) fn choose(
    an: &Analysis,
    site: NodeId,
    config: &RuleConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(NodeId, GuardForm, String), TransformError> {
    if an.unit.ast.get(site).is_none() || !is_boundary(an, site) {
        return Err(TransformError::NoDonorStatement(site));
    }
    let donors = donors_for(an, site, config);
    let donor = *donors.choose(rng).ok_or(TransformError::NoDonorStatement(site))?;
    let form = *config.dead_guard_forms.choose(rng).unwrap_or(&GuardForm::IfLess);
    let operands = guard_operands(an, site);
    let operand = operands.choose(rng).cloned().unwrap_or_else(|| "0".into());
    Ok((donor, form, operand))
}

/// Deterministic variant with the donor, guard form and operand given.
pub fn inject_dead_code_with(
    unit: &SourceUnit,
    site: NodeId,
    donor: NodeId,
    form: GuardForm,
    operand: &str,
) -> Result<TransformOutcome, TransformError> {
    let an = Analysis::new(unit)?;
    let donors = donors_for(&an, site, &RuleConfig {
        allow_compound_donors: true,
        ..RuleConfig::default()
    });
    if !is_boundary(&an, site) || !donors.contains(&donor) {
        return Err(TransformError::NoDonorStatement(site));
    }
    insert(&an, site, donor, 0, |d| form.build(operand, d))
}

pub(crate) fn insert(
    an: &Analysis,
    site: NodeId,
    donor: NodeId,
    seed: u64,
    wrap: impl Fn(Tree) -> Tree,
) -> Result<TransformOutcome, TransformError> {
    let ast = &an.unit.ast;
    let dead = wrap(detached(ast.to_tree(donor)));
    let guard_text = print_tree(&dead);
    let mut tree = ast.tree();
    tree.splice(site, &mut |s| vec![dead.clone(), s]);
    let span = ast.node(donor).span;
    an.finish(
        RuleId::DeadCode,
        site,
        seed,
        &tree,
        aux([
            ("donor", an.text_of(donor)),
            ("donor_span", format!("{}..{}", span.start, span.end)),
            ("inserted", guard_text),
        ]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(src: &str) -> SourceUnit {
        SourceUnit::parse("t", src).unwrap()
    }

    #[test]
    fn only_returns_means_no_donor() {
        let u = unit("int f(int x) { if (x > 0) { return 1; } return 0; }");
        let an = Analysis::new(&u).unwrap();
        assert!(sites(&an, &RuleConfig::default()).is_empty());
        let ret = u.ast.children(u.ast.children(u.ast.functions()[0])[1])[1];
        assert_eq!(
            inject_dead_code(&u, ret, &RuleConfig::default(), 0).unwrap_err(),
            TransformError::NoDonorStatement(ret)
        );
    }

    #[test]
    fn insertion_keeps_original_tokens_in_order() {
        let u = unit("int f(int a, int b) { a = a + b; b = b * 2; return a + b; }");
        let an = Analysis::new(&u).unwrap();
        for (k, site) in sites(&an, &RuleConfig::default()).into_iter().enumerate() {
            let out = inject_dead_code(&u, site, &RuleConfig::default(), k as u64).unwrap();
            let orig = u.canonicalized();
            let mut rest = out.transformed.lexemes().into_iter();
            for tok in orig.lexemes() {
                assert!(rest.any(|t| t == tok), "lost {tok}");
            }
        }
    }

    #[test]
    fn free_variables_must_be_in_scope() {
        let u = unit("int f(int a) { a = 1; { int b = 2; b = b + a; } return a; }");
        let an = Analysis::new(&u).unwrap();
        let body = u.ast.children(u.ast.functions()[0])[1];
        let first = u.ast.children(body)[0];
        let texts: Vec<String> = donors_for(&an, first, &RuleConfig::default())
            .into_iter()
            .map(|d| an.text_of(d))
            .collect();
        assert_eq!(texts, ["a = 1 ;"]);
    }

    #[test]
    fn compound_donors_need_the_flag() {
        let u = unit("int f(int a) { if (a > 0) { a = 2; } return a; }");
        let an = Analysis::new(&u).unwrap();
        let ret = u.ast.children(u.ast.children(u.ast.functions()[0])[1])[1];
        let plain = donors_for(&an, ret, &RuleConfig::default());
        let cfg = RuleConfig {
            allow_compound_donors: true,
            ..RuleConfig::default()
        };
        let all = donors_for(&an, ret, &cfg);
        assert_eq!(plain.len(), 1);
        assert_eq!(all.len(), 3);
    }
}
