use crate::dataflow::{is_pure, may_fail};
use crate::syntax::{NodeId, NodeKind, SourceUnit, Tree, Type};

use super::{aux, Analysis, RuleId, TransformError, TransformOutcome};

/// Which confusing form a site supports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Pattern {
    /// `i = j ; j += 1 ;` at this statement and its successor.
    PostIncrement,
    /// `if ( C ) y = p ; else y = q ;`
    Ternary,
}

fn ident_of<'a>(an: &'a Analysis, n: NodeId) -> Option<&'a str> {
    let ast = &an.unit.ast;
    (ast.kind(n) == NodeKind::Identifier).then(|| ast.node(n).text()).flatten()
}

/// `(op, lhs, rhs)` when `stmt` is an expression statement holding an
/// assignment.
fn assignment<'a>(an: &'a Analysis, stmt: NodeId) -> Option<(&'a str, NodeId, NodeId)> {
    let ast = &an.unit.ast;
    if ast.kind(stmt) != NodeKind::ExprStmt {
        return None;
    }
    let e = ast.children(stmt)[0];
    if ast.kind(e) != NodeKind::Assign {
        return None;
    }
    Some((ast.node(e).text()?, ast.children(e)[0], ast.children(e)[1]))
}

fn is_one(an: &Analysis, n: NodeId) -> bool {
    let ast = &an.unit.ast;
    ast.kind(n) == NodeKind::IntLit && ast.node(n).text() == Some("1")
}

/// `j += 1` or `j = j + 1`.
fn increments(an: &Analysis, stmt: NodeId, j: &str) -> bool {
    let ast = &an.unit.ast;
    match assignment(an, stmt) {
        Some(("+=", lhs, rhs)) => ident_of(an, lhs) == Some(j) && is_one(an, rhs),
        Some(("=", lhs, rhs)) if ident_of(an, lhs) == Some(j) && ast.kind(rhs) == NodeKind::Binary => {
            let k = ast.children(rhs);
            ast.node(rhs).text() == Some("+") && ident_of(an, k[0]) == Some(j) && is_one(an, k[1])
        }
        _ => false,
    }
}

/// Successor of `stmt` inside its block, if the pair forms the
/// post-increment pattern.
fn post_increment_pair(an: &Analysis, stmt: NodeId) -> Option<NodeId> {
    let ast = &an.unit.ast;
    let parent = an.parent(stmt)?;
    if ast.kind(parent) != NodeKind::Block {
        return None;
    }
    let (op, lhs, rhs) = assignment(an, stmt)?;
    let (i, j) = (ident_of(an, lhs)?, ident_of(an, rhs)?);
    if op != "=" || i == j || an.vis.lookup(stmt, j).map(|v| &v.ty) != Some(&Type::Int) {
        return None;
    }
    let siblings = ast.children(parent);
    let pos = siblings.iter().position(|&s| s == stmt)?;
    let next = *siblings.get(pos + 1)?;
    increments(an, next, j).then_some(next)
}

/// The single statement of a branch, looking through one level of braces.
fn sole_statement(an: &Analysis, branch: NodeId) -> Option<NodeId> {
    let ast = &an.unit.ast;
    match ast.kind(branch) {
        NodeKind::Block => match ast.children(branch) {
            [only] => Some(*only),
            _ => None,
        },
        _ => Some(branch),
    }
}

/// Both branches assign with `=` to the same place. An element target is
/// evaluated before the condition once rewritten, so its index and the
/// condition must be side-effect free and the index unable to fail.
fn ternary_parts(an: &Analysis, site: NodeId) -> Option<(NodeId, NodeId, NodeId, NodeId)> {
    let ast = &an.unit.ast;
    let kids = ast.children(site);
    if ast.kind(site) != NodeKind::If || kids.len() != 3 {
        return None;
    }
    let (op1, lhs, p) = assignment(an, sole_statement(an, kids[1])?)?;
    let (op2, lhs2, q) = assignment(an, sole_statement(an, kids[2])?)?;
    if op1 != "=" || op2 != "=" || ast.to_tree(lhs) != ast.to_tree(lhs2) {
        return None;
    }
    match ast.kind(lhs) {
        NodeKind::Identifier => {}
        NodeKind::Index => {
            let idx = ast.children(lhs)[1];
            if !is_pure(ast, idx) || may_fail(ast, idx) || !is_pure(ast, kids[0]) {
                return None;
            }
        }
        _ => return None,
    }
    Some((kids[0], lhs, p, q))
}

fn pattern_at(an: &Analysis, site: NodeId) -> Option<Pattern> {
    if post_increment_pair(an, site).is_some() {
        Some(Pattern::PostIncrement)
    } else if ternary_parts(an, site).is_some() {
        Some(Pattern::Ternary)
    } else {
        None
    }
}

pub(crate) fn sites(an: &Analysis) -> Vec<NodeId> {
    let ast = &an.unit.ast;
    ast.preorder(ast.root)
        .into_iter()
        .filter(|&n| pattern_at(an, n).is_some())
        .collect()
}

/// Folds `i = j ; j += 1 ;` into `i = j ++ ;`, or an assigning
/// `if`/`else` into a ternary.
pub fn confusion_insert(unit: &SourceUnit, site: NodeId) -> Result<TransformOutcome, TransformError> {
    apply(&Analysis::new(unit)?, site, 0)
}

pub(crate) fn apply(an: &Analysis, site: NodeId, seed: u64) -> Result<TransformOutcome, TransformError> {
    apply_with(an, site, seed, false)
}

pub(crate) fn apply_with(
    an: &Analysis,
    site: NodeId,
    seed: u64,
    swap_arms: bool,
) -> Result<TransformOutcome, TransformError> {
    let ast = &an.unit.ast;
    if ast.get(site).is_none() {
        return Err(TransformError::PatternMismatch(site));
    }
    let mut tree = ast.tree();
    let pattern = match pattern_at(an, site) {
        Some(Pattern::PostIncrement) => {
            let next = post_increment_pair(an, site).unwrap();
            let (_, lhs, rhs) = assignment(an, site).unwrap();
            let folded = Tree::expr_stmt(Tree::assign(
                "=",
                ast.to_tree(lhs),
                Tree::unary("++", ast.to_tree(rhs), true),
            ));
            tree.splice(next, &mut |_| Vec::new());
            tree.replace(site, &mut |_| folded.clone());
            "post-increment"
        }
        Some(Pattern::Ternary) => {
            let (c, lhs, p, q) = ternary_parts(an, site).unwrap();
            let (p, q) = if swap_arms { (q, p) } else { (p, q) };
            let ternary = Tree::new(NodeKind::Ternary, vec![ast.to_tree(c), ast.to_tree(p), ast.to_tree(q)]);
            let folded = Tree::expr_stmt(Tree::assign("=", ast.to_tree(lhs), ternary));
            tree.replace(site, &mut |_| folded.clone());
            "ternary"
        }
        None => return Err(TransformError::PatternMismatch(site)),
    };
    an.finish(
        RuleId::ConfusionInsert,
        site,
        seed,
        &tree,
        aux([("pattern", pattern.to_string()), ("statement", an.text_of(site))]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::print_tree;

    fn unit(src: &str) -> SourceUnit {
        SourceUnit::parse("t", src).unwrap()
    }

    fn fold(src: &str) -> Result<String, TransformError> {
        let u = unit(src);
        let an = Analysis::new(&u).unwrap();
        let site = sites(&an).first().copied().unwrap_or(u.ast.functions()[0]);
        let out = confusion_insert(&u, site)?;
        let ast = &out.transformed.ast;
        let body = ast.children(ast.functions()[0])[1];
        Ok(print_tree(&ast.to_tree(ast.children(body)[0])))
    }

    #[test]
    fn post_increment() {
        assert_eq!(fold("void g(int i, int j) { { i = j; j += 1; } }").unwrap(), "{ i = j ++ ; }");
        assert_eq!(fold("void g(int i, int j) { { i = j; j = j + 1; } }").unwrap(), "{ i = j ++ ; }");
    }

    #[test]
    fn ternary() {
        assert_eq!(
            fold("void g(int x, int y, int p, int q) { if (x != 0) { y = p; } else { y = q; } }").unwrap(),
            "y = ( x != 0 ) ? p : q ;"
        );
        assert_eq!(
            fold("void g(bool c, int y) { if (c) y = 1; else y = 2 + y; }").unwrap(),
            "y = c ? 1 : 2 + y ;"
        );
    }

    #[test]
    fn mismatches() {
        let err = fold("void g(int i, int j, int k) { { i = j; k += 1; } }").unwrap_err();
        assert!(matches!(err, TransformError::PatternMismatch(_)));
        // Same variable, non-int, or different targets.
        for src in [
            "void g(int j) { j = j; j += 1; }",
            "void g(str i, str j) { i = j; j += 1; }",
            "void g(bool c, int y, int z) { if (c) { y = 1; } else { z = 1; } }",
            "void g(bool c, int y) { if (c) { y += 1; } else { y = 1; } }",
            "void g(int[] a, int y) { if (f() > 0) { a[y] = 1; } else { a[y] = 2; } }",
            "void g(int[] a, int y) { if (y > 0) { a[y / 2] = 1; } else { a[y / 2] = 2; } }",
        ] {
            assert!(sites(&Analysis::new(&unit(src)).unwrap()).is_empty(), "{src}");
        }
    }

    #[test]
    fn pure_element_targets_fold() {
        assert_eq!(
            fold("void g(int[] a, int x) { if (a[x] > 0) { a[0] = 1; } else { a[0] = 2; } }").unwrap(),
            "a [ 0 ] = ( a [ x ] > 0 ) ? 1 : 2 ;"
        );
    }
}
