//! Canonical printing: every token separated by exactly one space, on one
//! line, with the minimal parentheses the precedence ladder requires. The one
//! exception is a compound ternary condition, which is always parenthesized.

use super::ast::{Ast, Detail, NodeKind, Tree};

const PREC_ASSIGN: u8 = 1;
const PREC_TERNARY: u8 = 2;
const PREC_PREFIX: u8 = 9;
const PREC_POSTFIX: u8 = 10;
const PREC_ATOM: u8 = 11;

pub fn binary_precedence(op: &str) -> u8 {
    match op {
        "||" => 3,
        "&&" => 4,
        "==" | "!=" => 5,
        "<" | "<=" | ">" | ">=" => 6,
        "+" | "-" => 7,
        "*" | "/" | "%" => 8,
        _ => panic!("unknown binary operator `{op}`"),
    }
}

fn precedence(t: &Tree) -> u8 {
    match t.kind {
        NodeKind::Assign => PREC_ASSIGN,
        NodeKind::Ternary => PREC_TERNARY,
        NodeKind::Binary => binary_precedence(t.op()),
        NodeKind::Unary => match t.detail {
            Detail::Unary { postfix: true } => PREC_POSTFIX,
            _ => PREC_PREFIX,
        },
        NodeKind::Index | NodeKind::Call => PREC_POSTFIX,
        _ => PREC_ATOM,
    }
}

pub fn print(ast: &Ast) -> String {
    print_tree(&ast.tree())
}

pub fn print_tree(tree: &Tree) -> String {
    tokens_of(tree).join(" ")
}

/// Canonical token sequence of a tree.
pub fn tokens_of(tree: &Tree) -> Vec<String> {
    let mut p = Printer { out: Vec::new() };
    if tree.kind.is_expression() {
        p.expr(tree, PREC_ASSIGN);
    } else {
        p.node(tree);
    }
    p.out
}

struct Printer {
    out: Vec<String>,
}

impl Printer {
    fn tok(&mut self, s: &str) {
        self.out.push(s.to_string());
    }

    fn ty(&mut self, t: &Tree) {
        if let Detail::Typed(ty) = &t.detail {
            for lx in ty.lexemes() {
                self.tok(lx);
            }
        }
    }

    fn node(&mut self, t: &Tree) {
        match t.kind {
            NodeKind::Unit => {
                for f in &t.children {
                    self.node(f);
                }
            }
            NodeKind::Function => {
                self.ty(t);
                self.tok(t.op());
                self.node(&t.children[0]);
                self.node(&t.children[1]);
            }
            NodeKind::ParamList => {
                self.tok("(");
                for (i, p) in t.children.iter().enumerate() {
                    if i > 0 {
                        self.tok(",");
                    }
                    self.ty(p);
                    self.tok(p.children[0].op());
                }
                self.tok(")");
            }
            NodeKind::Block => {
                self.tok("{");
                for s in &t.children {
                    self.node(s);
                }
                self.tok("}");
            }
            NodeKind::DeclStmt => {
                self.ty(t);
                self.tok(t.children[0].op());
                if let Some(init) = t.children.get(1) {
                    self.tok("=");
                    self.expr(init, PREC_ASSIGN);
                }
                self.tok(";");
            }
            NodeKind::ExprStmt => {
                self.expr(&t.children[0], PREC_ASSIGN);
                self.tok(";");
            }
            NodeKind::If => {
                self.tok("if");
                self.tok("(");
                self.expr(&t.children[0], PREC_ASSIGN);
                self.tok(")");
                let then = &t.children[1];
                if t.children.len() == 3 && ends_with_open_if(then) {
                    self.tok("{");
                    self.node(then);
                    self.tok("}");
                } else {
                    self.node(then);
                }
                if let Some(other) = t.children.get(2) {
                    self.tok("else");
                    self.node(other);
                }
            }
            NodeKind::While => {
                self.tok("while");
                self.tok("(");
                self.expr(&t.children[0], PREC_ASSIGN);
                self.tok(")");
                self.node(&t.children[1]);
            }
            NodeKind::For => {
                let Detail::For { init, cond, update } = t.detail else {
                    panic!("for node without header detail");
                };
                let mut it = t.children.iter();
                self.tok("for");
                self.tok("(");
                if init {
                    self.node(it.next().unwrap());
                } else {
                    self.tok(";");
                }
                if cond {
                    self.expr(it.next().unwrap(), PREC_ASSIGN);
                }
                self.tok(";");
                if update {
                    self.expr(it.next().unwrap(), PREC_ASSIGN);
                }
                self.tok(")");
                self.node(it.next().unwrap());
            }
            NodeKind::Return => {
                self.tok("return");
                if let Some(e) = t.children.first() {
                    self.expr(e, PREC_ASSIGN);
                }
                self.tok(";");
            }
            NodeKind::Break => {
                self.tok("break");
                self.tok(";");
            }
            NodeKind::Continue => {
                self.tok("continue");
                self.tok(";");
            }
            _ => self.expr(t, PREC_ASSIGN),
        }
    }

    fn expr(&mut self, t: &Tree, min: u8) {
        let needs_parens = precedence(t) < min;
        if needs_parens {
            self.tok("(");
        }
        match t.kind {
            NodeKind::Assign => {
                self.expr(&t.children[0], PREC_POSTFIX);
                self.tok(t.op());
                self.expr(&t.children[1], PREC_ASSIGN);
            }
            NodeKind::Ternary => {
                let cond = &t.children[0];
                if matches!(cond.kind, NodeKind::Binary | NodeKind::Ternary | NodeKind::Assign) {
                    self.tok("(");
                    self.expr(cond, PREC_ASSIGN);
                    self.tok(")");
                } else {
                    self.expr(cond, PREC_TERNARY + 1);
                }
                self.tok("?");
                self.expr(&t.children[1], PREC_ASSIGN);
                self.tok(":");
                self.expr(&t.children[2], PREC_TERNARY);
            }
            NodeKind::Binary => {
                let p = binary_precedence(t.op());
                self.expr(&t.children[0], p);
                self.tok(t.op());
                self.expr(&t.children[1], p + 1);
            }
            NodeKind::Unary => {
                if matches!(t.detail, Detail::Unary { postfix: true }) {
                    self.expr(&t.children[0], PREC_POSTFIX);
                    self.tok(t.op());
                } else {
                    self.tok(t.op());
                    self.expr(&t.children[0], PREC_PREFIX);
                }
            }
            NodeKind::Call => {
                self.tok(t.op());
                self.tok("(");
                for (i, a) in t.children.iter().enumerate() {
                    if i > 0 {
                        self.tok(",");
                    }
                    self.expr(a, PREC_ASSIGN);
                }
                self.tok(")");
            }
            NodeKind::Index => {
                self.expr(&t.children[0], PREC_POSTFIX);
                self.tok("[");
                self.expr(&t.children[1], PREC_ASSIGN);
                self.tok("]");
            }
            NodeKind::Identifier | NodeKind::IntLit | NodeKind::BoolLit | NodeKind::StrLit => {
                self.tok(t.op());
            }
            other => panic!("statement kind {other:?} in expression position"),
        }
        if needs_parens {
            self.tok(")");
        }
    }
}

/// True when a trailing `else` printed after `t` would bind inside it.
fn ends_with_open_if(t: &Tree) -> bool {
    match t.kind {
        NodeKind::If => match t.children.get(2) {
            None => true,
            Some(other) => ends_with_open_if(other),
        },
        NodeKind::While => ends_with_open_if(&t.children[1]),
        NodeKind::For => ends_with_open_if(t.children.last().unwrap()),
        _ => false,
    }
}
