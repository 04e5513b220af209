use std::collections::BTreeSet;

use crate::dataflow::{free_vars, may_fail};
use crate::syntax::{Detail, NodeId, NodeKind, SourceUnit, Tree};

use super::{aux, detached, Analysis, RuleId, TransformError, TransformOutcome};

pub(crate) fn sites(an: &Analysis) -> Vec<NodeId> {
    let ast = &an.unit.ast;
    ast.preorder(ast.root)
        .into_iter()
        .filter(|&n| match ast.kind(n) {
            NodeKind::While => true,
            NodeKind::For => for_convertible(an, n),
            _ => false,
        })
        .collect()
}

/// A body that redeclares a variable of the update clause would capture the
/// update once it moves inside the body.
fn for_convertible(an: &Analysis, n: NodeId) -> bool {
    let ast = &an.unit.ast;
    let parts = ast.for_parts(n);
    let Some(update) = parts.update else {
        return true;
    };
    let touched = free_vars(ast, update);
    !ast.preorder(parts.body)
        .into_iter()
        .any(|d| ast.kind(d) == NodeKind::DeclStmt && touched.contains(ast.decl_name(d)))
}

/// Rewrites `for` as `while` and `while` as `for ( ; C ; )`.
pub fn loop_exchange(unit: &SourceUnit, site: NodeId) -> Result<TransformOutcome, TransformError> {
    apply(&Analysis::new(unit)?, site, 0)
}

pub(crate) fn apply(an: &Analysis, site: NodeId, seed: u64) -> Result<TransformOutcome, TransformError> {
    let ast = &an.unit.ast;
    let mut tree = ast.tree();
    let direction = match ast.get(site).map(|n| n.kind) {
        Some(NodeKind::While) => {
            let kids = ast.children(site);
            let for_loop = Tree::new(NodeKind::For, vec![ast.to_tree(kids[0]), ast.to_tree(kids[1])])
                .with_detail(Detail::For {
                    init: false,
                    cond: true,
                    update: false,
                });
            tree.replace(site, &mut |_| for_loop.clone());
            "while-to-for"
        }
        Some(NodeKind::For) if for_convertible(an, site) => {
            let replacement = for_to_while(an, site);
            tree.splice(site, &mut |_| replacement.clone());
            "for-to-while"
        }
        _ => return Err(TransformError::NotALoopSite(site)),
    };
    an.finish(
        RuleId::LoopExchange,
        site,
        seed,
        &tree,
        aux([("direction", direction.to_string()), ("loop", an.text_of(site))]),
    )
}

pub(crate) fn for_to_while(an: &Analysis, site: NodeId) -> Vec<Tree> {
    for_to_while_with(an, site, true)
}

/// Builds the statements replacing the `for` at `site`. With
/// `patch_continue` unset the update is not copied before `continue`.
pub(crate) fn for_to_while_with(an: &Analysis, site: NodeId, patch_continue: bool) -> Vec<Tree> {
    let ast = &an.unit.ast;
    let parts = ast.for_parts(site);
    let cond = parts.cond.map_or_else(|| Tree::boolean(true), |c| ast.to_tree(c));
    let mut body = ast.to_tree(parts.body).into_block();
    if let Some(u) = parts.update {
        let update = Tree::expr_stmt(detached(ast.to_tree(u)));
        let breaks = update_is_local(an, site, u);
        patch_jumps(&mut body, &update, patch_continue, breaks);
        body.children.push(update);
    }
    let while_loop = Tree::new(NodeKind::While, vec![cond, body]);
    let Some(init) = parts.init else {
        return vec![while_loop];
    };
    let init_tree = ast.to_tree(init);
    if ast.kind(init) != NodeKind::DeclStmt || can_hoist_flat(an, site, ast.decl_name(init)) {
        vec![init_tree, while_loop]
    } else {
        vec![Tree::block(vec![init_tree, while_loop])]
    }
}

/// The update can also run before `break` when it only touches the
/// variable declared by the loop header and can neither call out nor fail:
/// that variable is dead once the loop exits.
fn update_is_local(an: &Analysis, site: NodeId, update: NodeId) -> bool {
    let ast = &an.unit.ast;
    let Some(init) = ast.for_parts(site).init else {
        return false;
    };
    if ast.kind(init) != NodeKind::DeclStmt {
        return false;
    }
    let declared: BTreeSet<String> = [ast.decl_name(init).to_string()].into();
    let calls = ast.preorder(update).into_iter().any(|n| ast.kind(n) == NodeKind::Call);
    !calls && !may_fail(ast, update) && free_vars(ast, update).is_subset(&declared)
}

/// A declaration moved in front of the loop can stay flat when the enclosing
/// block neither sees nor later declares the same name.
fn can_hoist_flat(an: &Analysis, site: NodeId, name: &str) -> bool {
    let ast = &an.unit.ast;
    let Some(parent) = an.parent(site) else {
        return false;
    };
    if ast.kind(parent) != NodeKind::Block || an.vis.lookup(site, name).is_some() {
        return false;
    }
    let siblings = ast.children(parent);
    let pos = siblings.iter().position(|&s| s == site).unwrap_or(0);
    !siblings[pos + 1..]
        .iter()
        .any(|&s| ast.kind(s) == NodeKind::DeclStmt && ast.decl_name(s) == name)
}

fn is_jump(t: &Tree, continues: bool, breaks: bool) -> bool {
    (continues && t.kind == NodeKind::Continue) || (breaks && t.kind == NodeKind::Break)
}

/// Copies `update` in front of every `continue` (and `break`, if asked)
/// that binds to the loop being rewritten. Nested loops are left alone.
fn patch_jumps(t: &mut Tree, update: &Tree, continues: bool, breaks: bool) {
    match t.kind {
        NodeKind::For | NodeKind::While => {}
        NodeKind::Block => {
            for mut c in std::mem::take(&mut t.children) {
                if is_jump(&c, continues, breaks) {
                    t.children.push(update.clone());
                } else {
                    patch_jumps(&mut c, update, continues, breaks);
                }
                t.children.push(c);
            }
        }
        _ => {
            for c in &mut t.children {
                if is_jump(c, continues, breaks) {
                    let jump = std::mem::replace(c, Tree::block(Vec::new()));
                    *c = Tree::block(vec![update.clone(), jump]);
                } else {
                    patch_jumps(c, update, continues, breaks);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::print_tree;

    fn first_loop(u: &SourceUnit) -> NodeId {
        sites(&Analysis::new(u).unwrap())[0]
    }

    fn body_of(out: &TransformOutcome) -> String {
        let ast = &out.transformed.ast;
        let body = ast.children(ast.functions()[0])[1];
        let inner: Vec<String> = ast.children(body).iter().map(|&s| print_tree(&ast.to_tree(s))).collect();
        inner.join(" ")
    }

    fn exchange(src: &str) -> String {
        let u = SourceUnit::parse("t", src).unwrap();
        body_of(&loop_exchange(&u, first_loop(&u)).unwrap())
    }

    #[test]
    fn for_with_continue() {
        assert_eq!(
            exchange("void g() { for(int i = 0; i < 10; i++){ if(i){ foo(); continue;} bar(); } }"),
            "int i = 0 ; while ( i < 10 ) { if ( i ) { foo ( ) ; i ++ ; continue ; } bar ( ) ; i ++ ; }"
        );
    }

    #[test]
    fn while_to_for() {
        assert_eq!(exchange("void g(bool c) { while (c) { b(); } }"), "for ( ; c ; ) { b ( ) ; }");
    }

    #[test]
    fn empty_header() {
        assert_eq!(
            exchange("void g(bool x) { for(;;){ if(x) break; } }"),
            "while ( true ) { if ( x ) break ; }"
        );
    }

    #[test]
    fn local_update_runs_before_break() {
        assert_eq!(
            exchange("void g() { for (int i = 0; i < 3; i++) { if (i == 1) break; } }"),
            "int i = 0 ; while ( i < 3 ) { if ( i == 1 ) { i ++ ; break ; } i ++ ; }"
        );
    }

    #[test]
    fn observable_update_skips_break() {
        assert_eq!(
            exchange("int g(int i) { for (i = 0; i < 3; i++) { if (i == 1) break; } return i; }"),
            "i = 0 ; while ( i < 3 ) { if ( i == 1 ) break ; i ++ ; } return i ;"
        );
    }

    #[test]
    fn colliding_declaration_is_scoped() {
        assert_eq!(
            exchange("void g() { for (int i = 0; i < 2; i++) { } int i = 5; }"),
            "{ int i = 0 ; while ( i < 2 ) { i ++ ; } } int i = 5 ;"
        );
    }

    #[test]
    fn nested_continue_is_untouched() {
        assert_eq!(
            exchange("void g() { for (int i = 0; i < 2; i++) { while (c()) { continue; } } }"),
            "int i = 0 ; while ( i < 2 ) { while ( c ( ) ) { continue ; } i ++ ; }"
        );
    }

    #[test]
    fn body_shadowing_update_is_not_a_site() {
        let u = SourceUnit::parse("t", "void g() { for (int i = 0; i < 2; i++) { int i = 7; } }").unwrap();
        assert!(sites(&Analysis::new(&u).unwrap()).is_empty());
    }

    #[test]
    fn non_loops_are_rejected() {
        let u = SourceUnit::parse("t", "int f(){ return 1; }").unwrap();
        assert!(sites(&Analysis::new(&u).unwrap()).is_empty());
        let root = u.ast.functions()[0];
        assert_eq!(loop_exchange(&u, root).unwrap_err(), TransformError::NotALoopSite(root));
    }

    #[test]
    fn two_loops_in_source_order() {
        let u = SourceUnit::parse("t", "void g(int n) { for(;;){break;} while(n > 0){n--;} }").unwrap();
        let s = sites(&Analysis::new(&u).unwrap());
        assert_eq!(s.len(), 2);
        assert_eq!(u.ast.kind(s[0]), NodeKind::For);
        assert_eq!(u.ast.kind(s[1]), NodeKind::While);
    }
}
