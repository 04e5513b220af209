use std::fmt;

use super::lexer::Token;

/// Byte range into the source text, half-open.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn join(self, other: Span) -> Span {
        Span {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    /// Root of a compilation unit; children are `Function`s.
    Unit,
    Function,
    ParamList,
    Block,
    If,
    For,
    While,
    Return,
    Break,
    Continue,
    DeclStmt,
    ExprStmt,
    Assign,
    Binary,
    Unary,
    Ternary,
    Call,
    Index,
    Identifier,
    IntLit,
    BoolLit,
    StrLit,
}

impl NodeKind {
    pub fn is_statement(self) -> bool {
        matches!(
            self,
            NodeKind::Block
                | NodeKind::If
                | NodeKind::For
                | NodeKind::While
                | NodeKind::Return
                | NodeKind::Break
                | NodeKind::Continue
                | NodeKind::DeclStmt
                | NodeKind::ExprStmt
        )
    }

    pub fn is_expression(self) -> bool {
        matches!(
            self,
            NodeKind::Assign
                | NodeKind::Binary
                | NodeKind::Unary
                | NodeKind::Ternary
                | NodeKind::Call
                | NodeKind::Index
                | NodeKind::Identifier
                | NodeKind::IntLit
                | NodeKind::BoolLit
                | NodeKind::StrLit
        )
    }

    pub fn is_loop(self) -> bool {
        matches!(self, NodeKind::For | NodeKind::While)
    }
}

/// Declared type of a variable, parameter or function result.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Int,
    Bool,
    Str,
    Void,
    Array(Box<Type>),
}

impl Type {
    pub fn is_int(&self) -> bool {
        matches!(self, Type::Int)
    }

    /// Lexemes this type prints as, e.g. `int [ ]`.
    pub fn lexemes(&self) -> Vec<&'static str> {
        match self {
            Type::Int => vec!["int"],
            Type::Bool => vec!["bool"],
            Type::Str => vec!["str"],
            Type::Void => vec!["void"],
            Type::Array(inner) => {
                let mut out = inner.lexemes();
                out.push("[");
                out.push("]");
                out
            }
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => f.write_str("int"),
            Type::Bool => f.write_str("bool"),
            Type::Str => f.write_str("str"),
            Type::Void => f.write_str("void"),
            Type::Array(inner) => write!(f, "{inner}[]"),
        }
    }
}

/// Per-kind payload that does not fit the uniform children/token shape.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Detail {
    #[default]
    None,
    /// Return type of a `Function`, declared type of a `DeclStmt`.
    Typed(Type),
    /// Prefix or postfix position of a `Unary` operator.
    Unary { postfix: bool },
    /// Which of the three optional `for` header clauses are present.
    /// Present clauses appear as children in header order, followed by the body.
    For { init: bool, cond: bool, update: bool },
}

#[derive(Clone, Debug, PartialEq)]
pub struct AstNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub children: Vec<NodeId>,
    /// Leaf lexeme, operator, function name, or callee name depending on `kind`.
    pub token: Option<Token>,
    pub span: Span,
    pub detail: Detail,
}

impl AstNode {
    pub fn text(&self) -> Option<&str> {
        self.token.as_ref().map(|t| t.lexeme.as_str())
    }

    pub fn ty(&self) -> Option<&Type> {
        match &self.detail {
            Detail::Typed(t) => Some(t),
            _ => None,
        }
    }
}

/// Arena-allocated syntax tree. Child ids always precede their parent.
#[derive(Clone, Debug, PartialEq)]
pub struct Ast {
    pub root: NodeId,
    pub nodes: Vec<AstNode>,
    pub unit_name: String,
}

/// Header clauses of a `for` node, resolved to node ids.
#[derive(Clone, Copy, Debug)]
pub struct ForParts {
    pub init: Option<NodeId>,
    pub cond: Option<NodeId>,
    pub update: Option<NodeId>,
    pub body: NodeId,
}

impl Ast {
    pub fn node(&self, id: NodeId) -> &AstNode {
        &self.nodes[id.index()]
    }

    pub fn get(&self, id: NodeId) -> Option<&AstNode> {
        self.nodes.get(id.index())
    }

    pub fn kind(&self, id: NodeId) -> NodeKind {
        self.node(id).kind
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.node(id).children
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Parent links, indexed by node id.
    pub fn parents(&self) -> Vec<Option<NodeId>> {
        let mut parents = vec![None; self.nodes.len()];
        for node in &self.nodes {
            for &c in &node.children {
                parents[c.index()] = Some(node.id);
            }
        }
        parents
    }

    /// Pre-order traversal from `start`.
    pub fn preorder(&self, start: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![start];
        while let Some(id) = stack.pop() {
            out.push(id);
            for &c in self.children(id).iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    pub fn functions(&self) -> Vec<NodeId> {
        self.children(self.root)
            .iter()
            .copied()
            .filter(|&f| self.kind(f) == NodeKind::Function)
            .collect()
    }

    pub fn function_named(&self, name: &str) -> Option<NodeId> {
        self.functions()
            .into_iter()
            .find(|&f| self.node(f).text() == Some(name))
    }

    pub fn for_parts(&self, id: NodeId) -> ForParts {
        let node = self.node(id);
        let Detail::For { init, cond, update } = node.detail else {
            panic!("for_parts on non-for node {id}");
        };
        let mut it = node.children.iter().copied();
        let init = init.then(|| it.next().unwrap());
        let cond = cond.then(|| it.next().unwrap());
        let update = update.then(|| it.next().unwrap());
        let body = it.next().expect("for body");
        ForParts { init, cond, update, body }
    }

    /// Name declared by a `DeclStmt` node.
    pub fn decl_name(&self, decl: NodeId) -> &str {
        let ident = self.children(decl)[0];
        self.node(ident).text().unwrap_or_default()
    }

    /// Owned, span-free copy of the subtree at `id`.
    pub fn to_tree(&self, id: NodeId) -> Tree {
        let node = self.node(id);
        Tree {
            kind: node.kind,
            text: node.token.as_ref().map(|t| t.lexeme.clone()),
            detail: node.detail.clone(),
            children: node.children.iter().map(|&c| self.to_tree(c)).collect(),
            origin: Some(id),
        }
    }

    pub fn tree(&self) -> Tree {
        self.to_tree(self.root)
    }

    /// Node kinds and leaf lexemes match; spans and ids may differ.
    pub fn structurally_eq(&self, other: &Ast) -> bool {
        self.tree() == other.tree()
    }
}

/// Owned syntax tree used for rewriting. `origin` links back to the arena
/// node a subtree was copied from and is ignored by equality.
#[derive(Clone, Debug)]
pub struct Tree {
    pub kind: NodeKind,
    pub text: Option<String>,
    pub detail: Detail,
    pub children: Vec<Tree>,
    pub origin: Option<NodeId>,
}

impl PartialEq for Tree {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.text == other.text
            && self.detail == other.detail
            && self.children == other.children
    }
}

impl Eq for Tree {}

impl Tree {
    pub fn new(kind: NodeKind, children: Vec<Tree>) -> Self {
        Tree {
            kind,
            text: None,
            detail: Detail::None,
            children,
            origin: None,
        }
    }

    pub fn leaf(kind: NodeKind, text: impl Into<String>) -> Self {
        Tree {
            kind,
            text: Some(text.into()),
            detail: Detail::None,
            children: Vec::new(),
            origin: None,
        }
    }

    pub fn ident(name: impl Into<String>) -> Self {
        Tree::leaf(NodeKind::Identifier, name)
    }

    pub fn int(value: i64) -> Self {
        Tree::leaf(NodeKind::IntLit, value.to_string())
    }

    pub fn boolean(value: bool) -> Self {
        Tree::leaf(NodeKind::BoolLit, if value { "true" } else { "false" })
    }

    pub fn with_text(mut self, text: impl Into<String>) -> Self {
        self.text = Some(text.into());
        self
    }

    pub fn with_detail(mut self, detail: Detail) -> Self {
        self.detail = detail;
        self
    }

    pub fn binary(op: &str, lhs: Tree, rhs: Tree) -> Self {
        Tree::new(NodeKind::Binary, vec![lhs, rhs]).with_text(op)
    }

    pub fn unary(op: &str, operand: Tree, postfix: bool) -> Self {
        Tree::new(NodeKind::Unary, vec![operand])
            .with_text(op)
            .with_detail(Detail::Unary { postfix })
    }

    pub fn assign(op: &str, lhs: Tree, rhs: Tree) -> Self {
        Tree::new(NodeKind::Assign, vec![lhs, rhs]).with_text(op)
    }

    pub fn expr_stmt(expr: Tree) -> Self {
        Tree::new(NodeKind::ExprStmt, vec![expr])
    }

    pub fn block(stmts: Vec<Tree>) -> Self {
        Tree::new(NodeKind::Block, stmts)
    }

    /// Wraps a statement in a block unless it already is one.
    pub fn into_block(self) -> Self {
        if self.kind == NodeKind::Block {
            self
        } else {
            Tree::block(vec![self])
        }
    }

    pub fn op(&self) -> &str {
        self.text.as_deref().unwrap_or("")
    }

    pub fn find(&self, origin: NodeId) -> Option<&Tree> {
        if self.origin == Some(origin) {
            return Some(self);
        }
        self.children.iter().find_map(|c| c.find(origin))
    }

    /// Replaces the subtree that originated at `target`. Returns whether a
    /// replacement happened.
    pub fn replace(&mut self, target: NodeId, f: &mut dyn FnMut(Tree) -> Tree) -> bool {
        if self.origin == Some(target) {
            let old = std::mem::replace(self, Tree::new(NodeKind::Block, Vec::new()));
            *self = f(old);
            return true;
        }
        self.children.iter_mut().any(|c| c.replace(target, f))
    }

    /// Replaces the child statement `target` of a block-like parent with
    /// zero or more statements.
    pub fn splice(&mut self, target: NodeId, f: &mut dyn FnMut(Tree) -> Vec<Tree>) -> bool {
        if let Some(pos) = self.children.iter().position(|c| c.origin == Some(target)) {
            if matches!(self.kind, NodeKind::Block | NodeKind::Unit) {
                let old = self.children.remove(pos);
                let new = f(old);
                let tail = self.children.split_off(pos);
                self.children.extend(new);
                self.children.extend(tail);
            } else {
                let old = std::mem::replace(&mut self.children[pos], Tree::block(Vec::new()));
                let mut new = f(old);
                self.children[pos] = if new.len() == 1 {
                    new.pop().unwrap()
                } else {
                    Tree::block(new)
                };
            }
            return true;
        }
        self.children.iter_mut().any(|c| c.splice(target, f))
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(Tree::node_count).sum::<usize>()
    }

    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Tree)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }
}
