//! Scope resolution and def-use chains over MiniLang trees.
//!
//! Reaching definitions are computed structurally on the tree: branch
//! conditions are ignored (both arms may run), loops iterate to a fixpoint
//! so updates in a body reach the loop header, and plain assignment to a
//! variable kills earlier definitions. Element writes `a[i] = e` are weak
//! updates of `a`: they add a definition without killing the old ones.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::syntax::{Ast, NodeId, NodeKind, Span, Type};

pub type ScopeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum Role {
    Def,
    Use,
    Update,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarOccurrence {
    pub name: String,
    pub node: NodeId,
    pub role: Role,
    pub scope: ScopeId,
    /// Identifier node of the declaration this occurrence resolves to.
    pub decl: NodeId,
    /// Updates such as `x += 1` or `x++` also read the previous value.
    pub reads: bool,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scope {
    pub id: ScopeId,
    pub parent: Option<ScopeId>,
    pub owner: NodeId,
}

/// All occurrences resolving to one declaration.
#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    pub name: String,
    pub decl: NodeId,
    pub ty: Type,
    /// Indices into [`DefUseGraph::occurrences`], in source order.
    pub occurrences: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct DefUseEdge {
    pub from: usize,
    pub to: usize,
}

/// Def-use edge with names replaced by the chain's first-occurrence number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AnonEdge {
    pub var: usize,
    pub from: Role,
    pub to: Role,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DefUseGraph {
    /// Sorted by source position.
    pub occurrences: Vec<VarOccurrence>,
    pub edges: Vec<DefUseEdge>,
    pub scopes: Vec<Scope>,
    /// Ordered by the position of the declaration.
    pub chains: Vec<Chain>,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum DataflowError {
    #[error("unresolved variable `{name}` at {span}")]
    UnresolvedVariable { name: String, span: Span },
    #[error("no variable named `{0}` is declared")]
    UnknownName(String),
}

impl DataflowError {
    pub fn span(&self) -> Option<Span> {
        match self {
            DataflowError::UnresolvedVariable { span, .. } => Some(*span),
            DataflowError::UnknownName(_) => None,
        }
    }
}

impl DefUseGraph {
    pub fn occurrence_at(&self, node: NodeId) -> Option<&VarOccurrence> {
        self.occurrences.iter().find(|o| o.node == node)
    }

    pub fn chain_of(&self, decl: NodeId) -> Option<&Chain> {
        self.chains.iter().find(|c| c.decl == decl)
    }

    /// Every chain declared under `name`, one per declaration.
    pub fn chains_of(&self, name: &str) -> Result<Vec<&Chain>, DataflowError> {
        let chains: Vec<&Chain> = self.chains.iter().filter(|c| c.name == name).collect();
        if chains.is_empty() {
            return Err(DataflowError::UnknownName(name.to_string()));
        }
        Ok(chains)
    }

    /// All occurrences of every chain named `name`.
    pub fn occurrences_of(&self, name: &str) -> Result<Vec<&VarOccurrence>, DataflowError> {
        let chains = self.chains_of(name)?;
        let mut out: Vec<&VarOccurrence> = chains
            .iter()
            .flat_map(|c| c.occurrences.iter().map(|&i| &self.occurrences[i]))
            .collect();
        out.sort_by_key(|o| o.span.start);
        Ok(out)
    }

    pub fn chain_occurrences(&self, chain: &Chain) -> Vec<&VarOccurrence> {
        chain.occurrences.iter().map(|&i| &self.occurrences[i]).collect()
    }

    /// Edges into occurrence `to`.
    pub fn edges_into(&self, to: usize) -> impl Iterator<Item = &DefUseEdge> {
        self.edges.iter().filter(move |e| e.to == to)
    }

    /// Edge multiset with variables numbered per chain in order of first
    /// occurrence, starting at 1.
    pub fn anonymized_edges(&self) -> Vec<AnonEdge> {
        let number: HashMap<NodeId, usize> = self
            .chains
            .iter()
            .enumerate()
            .map(|(i, c)| (c.decl, i + 1))
            .collect();
        let mut out: Vec<AnonEdge> = self
            .edges
            .iter()
            .map(|e| {
                let from = &self.occurrences[e.from];
                let to = &self.occurrences[e.to];
                AnonEdge {
                    var: number[&from.decl],
                    from: from.role,
                    to: to.role,
                }
            })
            .collect();
        out.sort();
        out
    }
}

/// Builds the def-use graph for every function in the tree.
pub fn build_def_use(ast: &Ast) -> Result<DefUseGraph, DataflowError> {
    let mut b = Builder {
        ast,
        scopes: Vec::new(),
        stack: Vec::new(),
        occs: Vec::new(),
        occ_at: HashMap::new(),
        edges: BTreeSet::new(),
        decl_ty: HashMap::new(),
        loops: Vec::new(),
    };
    for f in ast.functions() {
        b.function(f)?;
    }
    Ok(b.finish())
}

// Reaching definitions per chain; `None` marks unreachable code.
type State = Option<BTreeMap<NodeId, BTreeSet<usize>>>;

fn join(a: &State, b: &State) -> State {
    match (a, b) {
        (None, x) | (x, None) => x.clone(),
        (Some(a), Some(b)) => {
            let mut out = a.clone();
            for (k, v) in b {
                out.entry(*k).or_default().extend(v.iter().copied());
            }
            Some(out)
        }
    }
}

struct LoopCtx {
    breaks: State,
    continues: State,
}

struct Builder<'a> {
    ast: &'a Ast,
    scopes: Vec<Scope>,
    // (scope id, visible declarations name -> decl ident)
    stack: Vec<(ScopeId, Vec<(String, NodeId)>)>,
    occs: Vec<VarOccurrence>,
    occ_at: HashMap<NodeId, usize>,
    edges: BTreeSet<(usize, usize)>,
    decl_ty: HashMap<NodeId, Type>,
    loops: Vec<LoopCtx>,
}

impl<'a> Builder<'a> {
    fn finish(self) -> DefUseGraph {
        // Re-index occurrences in source order.
        let mut order: Vec<usize> = (0..self.occs.len()).collect();
        order.sort_by_key(|&i| (self.occs[i].span.start, self.occs[i].node));
        let mut remap = vec![0; self.occs.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        let occurrences: Vec<VarOccurrence> = order.iter().map(|&i| self.occs[i].clone()).collect();
        let mut edges: Vec<DefUseEdge> = self
            .edges
            .iter()
            .map(|&(f, t)| DefUseEdge {
                from: remap[f],
                to: remap[t],
            })
            .collect();
        edges.sort();

        let mut chains: Vec<Chain> = Vec::new();
        let mut chain_index: HashMap<NodeId, usize> = HashMap::new();
        for (i, o) in occurrences.iter().enumerate() {
            let ci = *chain_index.entry(o.decl).or_insert_with(|| {
                chains.push(Chain {
                    name: o.name.clone(),
                    decl: o.decl,
                    ty: self.decl_ty[&o.decl].clone(),
                    occurrences: Vec::new(),
                });
                chains.len() - 1
            });
            chains[ci].occurrences.push(i);
        }
        DefUseGraph {
            occurrences,
            edges,
            scopes: self.scopes,
            chains,
        }
    }

    fn push_scope(&mut self, owner: NodeId) {
        let id = self.scopes.len();
        let parent = self.stack.last().map(|s| s.0);
        self.scopes.push(Scope { id, parent, owner });
        self.stack.push((id, Vec::new()));
    }

    fn pop_scope(&mut self) {
        self.stack.pop();
    }

    fn resolve(&self, name: &str) -> Option<NodeId> {
        self.stack
            .iter()
            .rev()
            .find_map(|(_, vars)| vars.iter().rev().find(|(n, _)| n == name).map(|(_, d)| *d))
    }

    fn occurrence(&mut self, node: NodeId, role: Role, decl: NodeId, reads: bool) -> usize {
        if let Some(&i) = self.occ_at.get(&node) {
            return i;
        }
        let n = self.ast.node(node);
        let i = self.occs.len();
        self.occs.push(VarOccurrence {
            name: n.text().unwrap_or_default().to_string(),
            node,
            role,
            scope: self.stack.last().map_or(0, |s| s.0),
            decl,
            reads,
            span: n.span,
        });
        self.occ_at.insert(node, i);
        i
    }

    fn declare(&mut self, decl_stmt: NodeId, state: &mut State) {
        let ident = self.ast.children(decl_stmt)[0];
        let name = self.ast.node(ident).text().unwrap_or_default().to_string();
        let ty = self.ast.node(decl_stmt).ty().cloned().unwrap_or(Type::Int);
        self.decl_ty.insert(ident, ty);
        let occ = self.occurrence(ident, Role::Def, ident, false);
        self.stack.last_mut().unwrap().1.push((name, ident));
        if let Some(s) = state {
            s.insert(ident, BTreeSet::from([occ]));
        }
    }

    fn unresolved(&self, node: NodeId) -> DataflowError {
        let n = self.ast.node(node);
        DataflowError::UnresolvedVariable {
            name: n.text().unwrap_or_default().to_string(),
            span: n.span,
        }
    }

    fn read(&mut self, node: NodeId, role: Role, reads: bool, state: &State) -> Result<(usize, NodeId), DataflowError> {
        let name = self.ast.node(node).text().unwrap_or_default();
        let decl = self.resolve(name).ok_or_else(|| self.unresolved(node))?;
        let occ = self.occurrence(node, role, decl, reads);
        if role == Role::Use || reads {
            if let Some(defs) = state.as_ref().and_then(|s| s.get(&decl)) {
                for &d in defs {
                    self.edges.insert((d, occ));
                }
            }
        }
        Ok((occ, decl))
    }

    fn function(&mut self, f: NodeId) -> Result<(), DataflowError> {
        let [params, body] = self.ast.children(f) else {
            unreachable!("function has params and body");
        };
        let (params, body) = (*params, *body);
        self.push_scope(f);
        let mut state: State = Some(BTreeMap::new());
        for &p in self.ast.children(params) {
            self.declare(p, &mut state);
        }
        self.stmt(body, state)?;
        self.pop_scope();
        Ok(())
    }

    fn stmt(&mut self, s: NodeId, state: State) -> Result<State, DataflowError> {
        let ast = self.ast;
        let kids = ast.children(s);
        match ast.kind(s) {
            NodeKind::Block => {
                self.push_scope(s);
                let mut st = state;
                for &c in kids {
                    st = self.stmt(c, st)?;
                }
                self.pop_scope();
                Ok(st)
            }
            NodeKind::DeclStmt => {
                let mut st = match kids.get(1) {
                    Some(&init) => self.expr(init, state)?,
                    None => state,
                };
                self.declare(s, &mut st);
                Ok(st)
            }
            NodeKind::ExprStmt => self.expr(kids[0], state),
            NodeKind::Return => {
                if let Some(&e) = kids.first() {
                    self.expr(e, state)?;
                }
                Ok(None)
            }
            NodeKind::Break => {
                let ctx = self.loops.last_mut().expect("break outside loop");
                ctx.breaks = join(&ctx.breaks, &state);
                Ok(None)
            }
            NodeKind::Continue => {
                let ctx = self.loops.last_mut().expect("continue outside loop");
                ctx.continues = join(&ctx.continues, &state);
                Ok(None)
            }
            NodeKind::If => {
                let after = self.expr(kids[0], state)?;
                let then = self.branch(kids[1], after.clone())?;
                let other = match kids.get(2) {
                    Some(&e) => self.branch(e, after)?,
                    None => after,
                };
                Ok(join(&then, &other))
            }
            NodeKind::While => {
                let (cond, body) = (kids[0], kids[1]);
                self.fixpoint(state, |b, head| {
                    let after_cond = b.expr(cond, head)?;
                    b.loops.push(LoopCtx { breaks: None, continues: None });
                    let out = b.branch(body, after_cond.clone());
                    let ctx = b.loops.pop().unwrap();
                    let out = out?;
                    Ok((join(&out, &ctx.continues), join(&after_cond, &ctx.breaks)))
                })
            }
            NodeKind::For => {
                let parts = ast.for_parts(s);
                self.push_scope(s);
                let entry = match parts.init {
                    Some(init) => self.stmt(init, state)?,
                    None => state,
                };
                let result = self.fixpoint(entry, |b, head| {
                    let after_cond = match parts.cond {
                        Some(c) => b.expr(c, head)?,
                        None => head,
                    };
                    b.loops.push(LoopCtx { breaks: None, continues: None });
                    let out = b.branch(parts.body, after_cond.clone());
                    let ctx = b.loops.pop().unwrap();
                    let out = join(&out?, &ctx.continues);
                    let back = match parts.update {
                        Some(u) => b.expr(u, out)?,
                        None => out,
                    };
                    let exit = if parts.cond.is_some() {
                        join(&after_cond, &ctx.breaks)
                    } else {
                        ctx.breaks
                    };
                    Ok((back, exit))
                });
                self.pop_scope();
                result
            }
            other => unreachable!("{other:?} is not a statement"),
        }
    }

    /// A statement in branch position gets its own scope even without braces.
    fn branch(&mut self, s: NodeId, state: State) -> Result<State, DataflowError> {
        if self.ast.kind(s) == NodeKind::Block {
            return self.stmt(s, state);
        }
        self.push_scope(s);
        let out = self.stmt(s, state);
        self.pop_scope();
        out
    }

    /// Runs `pass` until the loop-head state stops growing. `pass` returns
    /// the back-edge state and the loop-exit state.
    fn fixpoint(
        &mut self,
        entry: State,
        mut pass: impl FnMut(&mut Self, State) -> Result<(State, State), DataflowError>,
    ) -> Result<State, DataflowError> {
        let mut head = entry.clone();
        loop {
            let (back, exit) = pass(self, head.clone())?;
            let next = join(&entry, &back);
            if next == head {
                return Ok(exit);
            }
            head = next;
        }
    }

    fn expr(&mut self, e: NodeId, state: State) -> Result<State, DataflowError> {
        let ast = self.ast;
        let kids = ast.children(e);
        match ast.kind(e) {
            NodeKind::Identifier => {
                self.read(e, Role::Use, false, &state)?;
                Ok(state)
            }
            NodeKind::IntLit | NodeKind::BoolLit | NodeKind::StrLit => Ok(state),
            NodeKind::Assign => {
                let compound = ast.node(e).text() != Some("=");
                let (lhs, rhs) = (kids[0], kids[1]);
                match ast.kind(lhs) {
                    NodeKind::Identifier => {
                        let st = self.expr(rhs, state)?;
                        self.write(lhs, compound, true, st)
                    }
                    NodeKind::Index => {
                        let (base, idx) = (ast.children(lhs)[0], ast.children(lhs)[1]);
                        let st = self.expr(idx, state)?;
                        let st = self.expr(rhs, st)?;
                        self.write_target(base, st)
                    }
                    _ => Ok(state),
                }
            }
            NodeKind::Unary => {
                let op = ast.node(e).text().unwrap_or_default();
                let operand = kids[0];
                if op == "++" || op == "--" {
                    match ast.kind(operand) {
                        NodeKind::Identifier => self.write(operand, true, true, state),
                        NodeKind::Index => {
                            let (base, idx) = (ast.children(operand)[0], ast.children(operand)[1]);
                            let st = self.expr(idx, state)?;
                            self.write_target(base, st)
                        }
                        _ => self.expr(operand, state),
                    }
                } else {
                    self.expr(operand, state)
                }
            }
            NodeKind::Binary => {
                let op = ast.node(e).text().unwrap_or_default();
                let left = self.expr(kids[0], state)?;
                if op == "&&" || op == "||" {
                    let right = self.expr(kids[1], left.clone())?;
                    Ok(join(&left, &right))
                } else {
                    self.expr(kids[1], left)
                }
            }
            NodeKind::Ternary => {
                let after = self.expr(kids[0], state)?;
                let a = self.expr(kids[1], after.clone())?;
                let b = self.expr(kids[2], after)?;
                Ok(join(&a, &b))
            }
            NodeKind::Call => {
                let mut st = state;
                for &a in kids {
                    st = self.expr(a, st)?;
                }
                Ok(st)
            }
            NodeKind::Index => {
                let st = self.expr(kids[0], state)?;
                self.expr(kids[1], st)
            }
            other => unreachable!("{other:?} is not an expression"),
        }
    }

    fn write(&mut self, target: NodeId, reads: bool, kill: bool, state: State) -> Result<State, DataflowError> {
        let (occ, decl) = self.read(target, Role::Update, reads, &state)?;
        let mut state = state;
        if let Some(s) = state.as_mut() {
            let defs = s.entry(decl).or_default();
            if kill {
                defs.clear();
            }
            defs.insert(occ);
        }
        Ok(state)
    }

    fn write_target(&mut self, base: NodeId, state: State) -> Result<State, DataflowError> {
        if self.ast.kind(base) == NodeKind::Identifier {
            self.write(base, true, false, state)
        } else {
            self.expr(base, state)
        }
    }
}

/// Names used under `node` that are not declared under `node`.
pub fn free_vars(ast: &Ast, node: NodeId) -> BTreeSet<String> {
    fn walk(ast: &Ast, n: NodeId, scopes: &mut Vec<Vec<String>>, out: &mut BTreeSet<String>) {
        let kind = ast.kind(n);
        let kids = ast.children(n);
        let opens_scope = matches!(kind, NodeKind::Block | NodeKind::For | NodeKind::Function);
        if opens_scope {
            scopes.push(Vec::new());
        }
        match kind {
            NodeKind::Identifier => {
                let name = ast.node(n).text().unwrap_or_default();
                if !scopes.iter().any(|s| s.iter().any(|v| v == name)) {
                    out.insert(name.to_string());
                }
            }
            NodeKind::DeclStmt => {
                if let Some(&init) = kids.get(1) {
                    walk(ast, init, scopes, out);
                }
                let name = ast.decl_name(n).to_string();
                match scopes.last_mut() {
                    Some(s) => s.push(name),
                    None => scopes.push(vec![name]),
                }
            }
            _ => {
                for &c in kids {
                    walk(ast, c, scopes, out);
                }
            }
        }
        if opens_scope {
            scopes.pop();
        }
    }
    let mut out = BTreeSet::new();
    walk(ast, node, &mut Vec::new(), &mut out);
    out
}

/// No assignment, no `++`/`--`, no call anywhere under `node`.
pub fn is_pure(ast: &Ast, node: NodeId) -> bool {
    ast.preorder(node).into_iter().all(|n| {
        let node = ast.node(n);
        match node.kind {
            NodeKind::Assign | NodeKind::Call => false,
            NodeKind::Unary => !matches!(node.text(), Some("++" | "--")),
            _ => true,
        }
    })
}

/// Evaluation under `node` may raise a runtime error (division, indexing,
/// or a call).
pub fn may_fail(ast: &Ast, node: NodeId) -> bool {
    ast.preorder(node).into_iter().any(|n| {
        let node = ast.node(n);
        match node.kind {
            NodeKind::Index | NodeKind::Call => true,
            NodeKind::Binary | NodeKind::Assign => matches!(node.text(), Some("/" | "%" | "/=" | "%=")),
            _ => false,
        }
    })
}

/// A variable visible at some program point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VisibleVar {
    pub name: String,
    pub ty: Type,
    pub decl: NodeId,
}

/// Variables in scope immediately before each statement, innermost last.
/// Shadowed outer declarations are omitted.
#[derive(Clone, Debug, Default)]
pub struct Visibility {
    at: HashMap<NodeId, Vec<VisibleVar>>,
}

impl Visibility {
    pub fn compute(ast: &Ast) -> Visibility {
        fn walk(ast: &Ast, n: NodeId, scopes: &mut Vec<Vec<VisibleVar>>, at: &mut HashMap<NodeId, Vec<VisibleVar>>) {
            let kind = ast.kind(n);
            if kind.is_statement() {
                let mut visible: Vec<VisibleVar> = Vec::new();
                for v in scopes.iter().flatten() {
                    visible.retain(|w| w.name != v.name);
                    visible.push(v.clone());
                }
                at.insert(n, visible);
            }
            let opens = matches!(kind, NodeKind::Block | NodeKind::For | NodeKind::Function);
            if opens {
                scopes.push(Vec::new());
            }
            match kind {
                NodeKind::DeclStmt => {
                    let ident = ast.children(n)[0];
                    scopes.last_mut().unwrap().push(VisibleVar {
                        name: ast.decl_name(n).to_string(),
                        ty: ast.node(n).ty().cloned().unwrap_or(Type::Int),
                        decl: ident,
                    });
                }
                NodeKind::Function => {
                    let params = ast.children(n)[0];
                    for &p in ast.children(params) {
                        walk(ast, p, scopes, at);
                    }
                    walk(ast, ast.children(n)[1], scopes, at);
                }
                NodeKind::If | NodeKind::While => {
                    for &c in ast.children(n) {
                        let branch = ast.kind(c).is_statement() && ast.kind(c) != NodeKind::Block;
                        if branch {
                            scopes.push(Vec::new());
                        }
                        walk(ast, c, scopes, at);
                        if branch {
                            scopes.pop();
                        }
                    }
                }
                _ => {
                    for &c in ast.children(n) {
                        walk(ast, c, scopes, at);
                    }
                }
            }
            if opens {
                scopes.pop();
            }
        }
        let mut at = HashMap::new();
        walk(ast, ast.root, &mut vec![Vec::new()], &mut at);
        Visibility { at }
    }

    pub fn before(&self, stmt: NodeId) -> &[VisibleVar] {
        self.at.get(&stmt).map_or(&[], Vec::as_slice)
    }

    pub fn lookup(&self, stmt: NodeId, name: &str) -> Option<&VisibleVar> {
        self.before(stmt).iter().find(|v| v.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::SourceUnit;

    fn graph(src: &str) -> (SourceUnit, DefUseGraph) {
        let u = SourceUnit::parse("t", src).unwrap();
        let g = build_def_use(&u.ast).unwrap();
        (u, g)
    }

    fn edge_text(u: &SourceUnit, g: &DefUseGraph) -> Vec<(String, Role, usize, Role, usize)> {
        g.edges
            .iter()
            .map(|e| {
                let a = &g.occurrences[e.from];
                let b = &g.occurrences[e.to];
                let _ = u;
                (a.name.clone(), a.role, a.span.start, b.role, b.span.start)
            })
            .collect()
    }

    fn first_stmt_expr(u: &SourceUnit, text: &str) -> NodeId {
        // Node whose canonical slice starts where `text` occurs in the source.
        let off = u.text.find(text).unwrap();
        u.ast
            .nodes
            .iter()
            .filter(|n| n.span.start == off)
            .max_by_key(|n| n.span.len())
            .unwrap()
            .id
    }

    #[test]
    fn straight_line_single_edge() {
        let (u, g) = graph("void f(int y){ int x = 1; y = x; }");
        let edges = edge_text(&u, &g);
        assert_eq!(edges.len(), 1);
        assert_eq!(edges[0].0, "x");
        assert_eq!((edges[0].1, edges[0].3), (Role::Def, Role::Use));
    }

    #[test]
    fn loop_updates_reach_header() {
        let src = "void f(){ int i = 0; while(i<3){ i = i + 1; } }";
        let (_, g) = graph(src);
        let def = src.find("i = 0").unwrap();
        let cond = src.find("i<3").unwrap();
        let upd = src.find("i = i").unwrap();
        let rhs = upd + 4;
        let got: BTreeSet<(usize, usize)> = g
            .edges
            .iter()
            .map(|e| (g.occurrences[e.from].span.start, g.occurrences[e.to].span.start))
            .collect();
        let want = BTreeSet::from([(def, cond), (def, rhs), (upd, cond), (upd, rhs)]);
        assert_eq!(got, want);
    }

    #[test]
    fn scope_exit_unresolves() {
        let u = SourceUnit::parse("t", "void f(int b){ { int a = 1; } b = a; }").unwrap();
        let err = build_def_use(&u.ast).unwrap_err();
        assert!(matches!(err, DataflowError::UnresolvedVariable { ref name, .. } if name == "a"));
    }

    #[test]
    fn kill_on_plain_assignment_but_not_on_element_write() {
        let (_, g) = graph("int f(int[] a){ int x = 1; x = 2; a[0] = x; return x + a[0]; }");
        let x_uses: Vec<_> = g.edges.iter().filter(|e| g.occurrences[e.to].name == "x").collect();
        // Both uses of x see only the `x = 2` update.
        assert_eq!(x_uses.len(), 2);
        assert!(x_uses.iter().all(|e| g.occurrences[e.from].role == Role::Update));
        // a[0] read sees both the parameter and the element write.
        let a_read = g.occurrences.iter().rposition(|o| o.name == "a").unwrap();
        assert_eq!(g.edges_into(a_read).count(), 2);
    }

    #[test]
    fn shadowing_makes_disjoint_chains() {
        let (_, g) = graph("int f(){ int x = 1; { int x = 2; x = x + 1; } return x; }");
        let chains = g.chains_of("x").unwrap();
        assert_eq!(chains.len(), 2);
        let outer: BTreeSet<usize> = chains[0].occurrences.iter().copied().collect();
        let inner: BTreeSet<usize> = chains[1].occurrences.iter().copied().collect();
        assert!(outer.is_disjoint(&inner));
        assert_eq!(outer.len(), 2);
        assert_eq!(inner.len(), 3);
        for e in &g.edges {
            assert_eq!(g.occurrences[e.from].decl, g.occurrences[e.to].decl);
        }
    }

    #[test]
    fn unknown_name() {
        let (_, g) = graph("int f(){ return 0; }");
        assert_eq!(g.occurrences_of("zz"), Err(DataflowError::UnknownName("zz".into())));
    }

    #[test]
    fn free_vars_examples() {
        let u = SourceUnit::parse("t", "void f(int high, int mid, int n, int s){ high = mid + 1; int t = 0; for(int i=0;i<n;i++) s = s + i; }").unwrap();
        let a = first_stmt_expr(&u, "high = mid + 1;");
        let a = u.ast.nodes.iter().find(|n| n.kind == NodeKind::ExprStmt && n.span.start == u.ast.node(a).span.start).unwrap().id;
        assert_eq!(free_vars(&u.ast, a), BTreeSet::from(["high".to_string(), "mid".to_string()]));
        let t = u.ast.nodes.iter().find(|n| n.kind == NodeKind::DeclStmt && u.ast.decl_name(n.id) == "t").unwrap().id;
        assert!(free_vars(&u.ast, t).is_empty());
        let f = u.ast.nodes.iter().find(|n| n.kind == NodeKind::For).unwrap().id;
        assert_eq!(free_vars(&u.ast, f), BTreeSet::from(["n".to_string(), "s".to_string()]));
    }

    #[test]
    fn purity() {
        for (src, want) in [("low <= high", true), ("f(x) > 0", false), ("i++ < n", false), ("a[i] + -b", true), ("(x = 1) > 0", false)] {
            let e = crate::syntax::parse_expression(&crate::syntax::lex(src).unwrap()).unwrap();
            assert_eq!(is_pure(&e, e.root), want, "{src}");
        }
    }

    #[test]
    fn visibility_tracks_order_and_shadowing() {
        let u = SourceUnit::parse("t", "int f(int a){ int b = a; { bool a = true; b = 1; } return b; }").unwrap();
        let vis = Visibility::compute(&u.ast);
        let inner_assign = u.ast.nodes.iter().find(|n| n.kind == NodeKind::ExprStmt).unwrap().id;
        let names: Vec<(&str, &Type)> = vis.before(inner_assign).iter().map(|v| (v.name.as_str(), &v.ty)).collect();
        assert_eq!(names, [("b", &Type::Int), ("a", &Type::Bool)]);
        let ret = u.ast.nodes.iter().find(|n| n.kind == NodeKind::Return).unwrap().id;
        assert_eq!(vis.lookup(ret, "a").unwrap().ty, Type::Int);
    }
}
