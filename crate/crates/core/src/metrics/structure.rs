use std::collections::HashMap;

use crate::dataflow::{AnonEdge, DefUseGraph};
use crate::syntax::{Ast, Detail, NodeId, NodeKind};

/// Node label used for subtree matching. Identifier and literal leaves
/// are reduced to their kind, as are function and callee names; operators,
/// declared types and header shapes are kept.
pub fn node_label(ast: &Ast, n: NodeId) -> String {
    let node = ast.node(n);
    let mut label = format!("{:?}", node.kind);
    match node.kind {
        NodeKind::Identifier
        | NodeKind::IntLit
        | NodeKind::BoolLit
        | NodeKind::StrLit
        | NodeKind::Call => {}
        NodeKind::Function => {}
        _ => {
            if let Some(t) = node.text() {
                label.push(':');
                label.push_str(t);
            }
        }
    }
    match &node.detail {
        Detail::Typed(ty) => label.push_str(&format!("<{ty}>")),
        Detail::Unary { postfix: true } => label.push_str("<post>"),
        Detail::For { init, cond, update } => {
            label.push_str(&format!("<{}{}{}>", *init as u8, *cond as u8, *update as u8))
        }
        _ => {}
    }
    label
}

/// Multiset of subtree shapes, one per node. Shapes are interned so equal
/// subtrees share an id and comparison is linear in tree size.
#[derive(Default)]
struct Interner {
    ids: HashMap<(String, Vec<usize>), usize>,
}

impl Interner {
    fn shapes(&mut self, ast: &Ast) -> HashMap<usize, usize> {
        let mut shape = vec![0usize; ast.len()];
        let mut counts = HashMap::new();
        // Children precede parents in the arena.
        for node in &ast.nodes {
            let key = (
                node_label(ast, node.id),
                node.children.iter().map(|c| shape[c.index()]).collect(),
            );
            let next = self.ids.len();
            let id = *self.ids.entry(key).or_insert(next);
            shape[node.id.index()] = id;
            *counts.entry(id).or_insert(0) += 1;
        }
        counts
    }
}

/// Share of the reference's subtrees (as a multiset) also found in the
/// hypothesis.
pub fn syntax_match(hyp: &Ast, reference: &Ast) -> f64 {
    let mut interner = Interner::default();
    let r = interner.shapes(reference);
    let h = interner.shapes(hyp);
    let total: usize = r.values().sum();
    if total == 0 {
        return 1.0;
    }
    let matched: usize = r.iter().map(|(k, &c)| c.min(h.get(k).copied().unwrap_or(0))).sum();
    matched as f64 / total as f64
}

fn multiset(edges: Vec<AnonEdge>) -> HashMap<AnonEdge, usize> {
    let mut m = HashMap::new();
    for e in edges {
        *m.entry(e).or_insert(0) += 1;
    }
    m
}

/// Share of the reference's anonymized def-use edges found in the
/// hypothesis, or `None` when the reference has no edges.
pub fn dataflow_match(hyp: &DefUseGraph, reference: &DefUseGraph) -> Option<f64> {
    let r = reference.anonymized_edges();
    if r.is_empty() {
        return None;
    }
    let total = r.len();
    let r = multiset(r);
    let h = multiset(hyp.anonymized_edges());
    let matched: usize = r.iter().map(|(k, &c)| c.min(h.get(k).copied().unwrap_or(0))).sum();
    Some(matched as f64 / total as f64)
}
