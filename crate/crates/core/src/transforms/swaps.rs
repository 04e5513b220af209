use crate::dataflow::{is_pure, may_fail};
use crate::syntax::{print_tree, NodeId, NodeKind, SourceUnit, Tree, Type};

use super::{aux, Analysis, RuleId, TransformError, TransformOutcome};

fn flipped_comparison(op: &str) -> Option<&'static str> {
    Some(match op {
        "==" => "!=",
        "!=" => "==",
        "<" => ">=",
        ">=" => "<",
        ">" => "<=",
        "<=" => ">",
        _ => return None,
    })
}

/// Logical negation of a condition: flips a comparison, strips a leading
/// `!`, or wraps the whole condition in `!( )`.
pub fn negate_condition(cond: Tree) -> Tree {
    match cond.kind {
        NodeKind::Binary => match flipped_comparison(cond.op()) {
            Some(op) => cond.with_text(op),
            None => Tree::unary("!", cond, false),
        },
        NodeKind::Unary if cond.op() == "!" => cond.children.into_iter().next().unwrap(),
        _ => Tree::unary("!", cond, false),
    }
}

pub(crate) fn block_sites(an: &Analysis) -> Vec<NodeId> {
    let ast = &an.unit.ast;
    ast.preorder(ast.root)
        .into_iter()
        .filter(|&n| ast.kind(n) == NodeKind::If && ast.children(n).len() == 3)
        .collect()
}

/// Exchanges the branches of an `if`/`else` and negates its condition.
pub fn block_swap(unit: &SourceUnit, site: NodeId) -> Result<TransformOutcome, TransformError> {
    apply_block(&Analysis::new(unit)?, site, 0)
}

pub(crate) fn apply_block(an: &Analysis, site: NodeId, seed: u64) -> Result<TransformOutcome, TransformError> {
    apply_block_with(an, site, seed, negate_condition)
}

pub(crate) fn apply_block_with(
    an: &Analysis,
    site: NodeId,
    seed: u64,
    negate: fn(Tree) -> Tree,
) -> Result<TransformOutcome, TransformError> {
    let ast = &an.unit.ast;
    let is_if_else = ast.get(site).is_some_and(|n| n.kind == NodeKind::If && n.children.len() == 3);
    if !is_if_else {
        return Err(TransformError::NoElseBranch(site));
    }
    let kids = ast.children(site);
    let cond = negate(ast.to_tree(kids[0]));
    let negated = print_tree(&cond);
    let then = ast.to_tree(kids[2]).into_block();
    let other = ast.to_tree(kids[1]);
    let swapped = Tree::new(NodeKind::If, vec![cond, then, other]);
    let mut tree = ast.tree();
    tree.replace(site, &mut |_| swapped.clone());
    an.finish(
        RuleId::BlockSwap,
        site,
        seed,
        &tree,
        aux([("condition", an.text_of(kids[0])), ("negated_condition", negated)]),
    )
}

fn swapped_operator(op: &str) -> Option<&'static str> {
    Some(match op {
        "==" => "==",
        "!=" => "!=",
        "<" => ">",
        ">" => "<",
        "<=" => ">=",
        ">=" => "<=",
        "&&" => "&&",
        "||" => "||",
        _ => return None,
    })
}

/// Evaluation order of the two operands must be unobservable: no side
/// effects, and at most one operand able to fail. For `&&`/`||` the right
/// operand may not have run at all, so neither may fail.
/// Type of an expression when it is known without running it and the
/// expression cannot raise a type mismatch.
fn static_type(an: &Analysis, n: NodeId) -> Option<Type> {
    let ast = &an.unit.ast;
    let node = ast.node(n);
    let kid = |k: usize| static_type(an, node.children[k]);
    match node.kind {
        NodeKind::IntLit => Some(Type::Int),
        NodeKind::BoolLit => Some(Type::Bool),
        NodeKind::StrLit => Some(Type::Str),
        NodeKind::Identifier => {
            let occ = an.graph.occurrence_at(n)?;
            an.graph.chain_of(occ.decl).map(|c| c.ty.clone())
        }
        NodeKind::Unary => match (node.text()?, kid(0)?) {
            ("-", Type::Int) => Some(Type::Int),
            ("!", Type::Bool) => Some(Type::Bool),
            _ => None,
        },
        NodeKind::Binary => {
            let (l, r) = (kid(0)?, kid(1)?);
            match node.text()? {
                "+" | "-" | "*" | "/" | "%" if l == Type::Int && r == Type::Int => Some(Type::Int),
                "<" | "<=" | ">" | ">=" if l == Type::Int && r == Type::Int => Some(Type::Bool),
                "==" | "!=" if l == r && matches!(l, Type::Int | Type::Bool) => Some(Type::Bool),
                "&&" | "||" if l == Type::Bool && r == Type::Bool => Some(Type::Bool),
                _ => None,
            }
        }
        NodeKind::Ternary => {
            let (c, a, b) = (kid(0)?, kid(1)?, kid(2)?);
            (c == Type::Bool && a == b).then_some(a)
        }
        _ => None,
    }
}

fn swappable(an: &Analysis, n: NodeId) -> bool {
    let ast = &an.unit.ast;
    let node = ast.node(n);
    if node.kind != NodeKind::Binary {
        return false;
    }
    let Some(op) = node.text() else { return false };
    if swapped_operator(op).is_none() {
        return false;
    }
    let (l, r) = (node.children[0], node.children[1]);
    if !is_pure(ast, l) || !is_pure(ast, r) {
        return false;
    }
    match op {
        // Short-circuiting hides errors in the right operand, type
        // mismatches included.
        "&&" | "||" => {
            !may_fail(ast, l)
                && !may_fail(ast, r)
                && static_type(an, l) == Some(Type::Bool)
                && static_type(an, r) == Some(Type::Bool)
        }
        _ => !(may_fail(ast, l) && may_fail(ast, r)),
    }
}

pub(crate) fn operand_sites(an: &Analysis) -> Vec<NodeId> {
    let ast = &an.unit.ast;
    ast.preorder(ast.root).into_iter().filter(|&n| swappable(an, n)).collect()
}

/// Swaps the operands of a comparison or logical operator, mirroring
/// `<`/`<=`/`>`/`>=`.
pub fn operand_swap(unit: &SourceUnit, site: NodeId) -> Result<TransformOutcome, TransformError> {
    apply_operand(&Analysis::new(unit)?, site, 0)
}

pub(crate) fn apply_operand(an: &Analysis, site: NodeId, seed: u64) -> Result<TransformOutcome, TransformError> {
    apply_operand_with(an, site, seed, true)
}

pub(crate) fn apply_operand_with(
    an: &Analysis,
    site: NodeId,
    seed: u64,
    mirror: bool,
) -> Result<TransformOutcome, TransformError> {
    let ast = &an.unit.ast;
    if ast.get(site).is_none() || !swappable(an, site) {
        return Err(TransformError::IneligibleOperator(site));
    }
    let node = ast.node(site);
    let op = node.text().unwrap_or_default();
    let new_op = if mirror { swapped_operator(op).unwrap() } else { op };
    let swapped = Tree::binary(new_op, ast.to_tree(node.children[1]), ast.to_tree(node.children[0]));
    let mut tree = ast.tree();
    tree.replace(site, &mut |_| swapped.clone());
    an.finish(
        RuleId::OperandSwap,
        site,
        seed,
        &tree,
        aux([("operator", format!("{op} -> {new_op}")), ("expression", an.text_of(site))]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{lex, parse_expression};

    fn expr(src: &str) -> Tree {
        parse_expression(&lex(src).unwrap()).unwrap().tree()
    }

    fn negated(src: &str) -> String {
        print_tree(&negate_condition(expr(src)))
    }

    #[test]
    fn negation_forms() {
        assert_eq!(negated("arr[mid] == key"), "arr [ mid ] != key");
        assert_eq!(negated("!done"), "done");
        assert_eq!(negated("a && b"), "! ( a && b )");
        assert_eq!(negated("x"), "! x");
        assert_eq!(negated("a <= b"), "a > b");
    }

    #[test]
    fn conjunction_negation_truth_table() {
        for a in [false, true] {
            for b in [false, true] {
                let src = format!("bool f() {{ bool a = {a}; bool b = {b}; return {}; }}", negated("a && b"));
                let u = SourceUnit::parse("t", &src).unwrap();
                let out = crate::interp::run(&u, "f", &[], crate::interp::ExternOracle::new(0), 1000);
                assert_eq!(out.result, Some(crate::interp::Value::Bool(!(a && b))));
            }
        }
    }

    fn unit(src: &str) -> SourceUnit {
        SourceUnit::parse("t", src).unwrap()
    }

    fn site_with_text(u: &SourceUnit, kind: NodeKind, text: &str) -> NodeId {
        u.ast
            .preorder(u.ast.root)
            .into_iter()
            .find(|&n| u.ast.kind(n) == kind && print_tree(&u.ast.to_tree(n)) == text)
            .unwrap()
    }

    #[test]
    fn low_le_high() {
        let u = unit("int f(int low, int high) { while (low <= high) { low++; } return low; }");
        let site = site_with_text(&u, NodeKind::Binary, "low <= high");
        let out = operand_swap(&u, site).unwrap();
        assert!(out.transformed.canonical().contains("while ( high >= low )"));
    }

    #[test]
    fn operand_swap_twice_restores() {
        let u = unit("bool f(int a, int b) { return a < b; }");
        let once = operand_swap(&u, site_with_text(&u, NodeKind::Binary, "a < b")).unwrap().transformed;
        let twice = operand_swap(&once, site_with_text(&once, NodeKind::Binary, "b > a")).unwrap();
        assert_eq!(twice.transformed.canonical(), u.canonical());
    }

    #[test]
    fn ill_typed_logical_operands_are_ineligible() {
        let u = unit("bool f(int n, bool b) { return false && n; }");
        assert!(operand_sites(&Analysis::new(&u).unwrap()).is_empty());
        let u = unit("bool f(int n, bool b) { return (n > 1) || !b; }");
        assert_eq!(operand_sites(&Analysis::new(&u).unwrap()).len(), 2);
    }

    #[test]
    fn impure_operands_are_ineligible() {
        let u = unit("bool h(int x, int y) { return f(x) && g(y); }");
        let site = site_with_text(&u, NodeKind::Binary, "f ( x ) && g ( y )");
        assert_eq!(operand_swap(&u, site).unwrap_err(), TransformError::IneligibleOperator(site));
        let u = unit("bool h(int x) { return x != 0 && 10 / x > 1; }");
        let an = Analysis::new(&u).unwrap();
        let texts: Vec<String> = operand_sites(&an).iter().map(|&n| an.text_of(n)).collect();
        assert_eq!(texts, ["x != 0", "10 / x > 1"]);
    }

    #[test]
    fn block_swap_else_if_chain() {
        let u = unit("int f(int x) { if (x < 0) { return 1; } else if (x > 5) { return 2; } return 3; }");
        let site = block_sites(&Analysis::new(&u).unwrap())[0];
        let out = block_swap(&u, site).unwrap();
        assert_eq!(
            out.transformed.canonical(),
            "int f ( int x ) { if ( x >= 0 ) { if ( x > 5 ) { return 2 ; } } else { return 1 ; } return 3 ; }"
        );
    }

    #[test]
    fn block_swap_needs_else() {
        let u = unit("int f(int x) { if (x < 0) { return 1; } return 3; }");
        assert!(block_sites(&Analysis::new(&u).unwrap()).is_empty());
        let f = u.ast.functions()[0];
        assert_eq!(block_swap(&u, f).unwrap_err(), TransformError::NoElseBranch(f));
    }
}
