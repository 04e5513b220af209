//! MiniLang front end: lexer, recursive-descent parser, and canonical printer.
//!
//! MiniLang is a closed C/Java-like subset: functions over `int`, `bool`,
//! `str` and `int[]`, with `if`/`else`, `for`, `while`, `break`, `continue`,
//! `return`, calls, indexing, the ternary operator, compound assignment and
//! `++`/`--`.
//!
//! ```
//! use denat::syntax::SourceUnit;
//!
//! let unit = SourceUnit::parse("demo", "int f(int x){ while(x<10){x++;} return x; }").unwrap();
//! assert_eq!(
//!     unit.canonical(),
//!     "int f ( int x ) { while ( x < 10 ) { x ++ ; } return x ; }"
//! );
//! ```

mod ast;
mod lexer;
mod parser;
mod printer;

pub use ast::{Ast, AstNode, Detail, ForParts, NodeId, NodeKind, Span, Tree, Type};
pub use lexer::{is_keyword, lex, quote_str, unquote_str, Token, TokenKind, KEYWORDS};
pub use parser::{parse, parse_expression, parse_statement, ASSIGN_OPS};
pub use printer::{binary_precedence, print, print_tree, tokens_of};

use thiserror::Error;

pub const LANGUAGE: &str = "minilang";

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SyntaxError {
    #[error("lex error at byte {offset}: {message}")]
    Lex { offset: usize, message: String },
    #[error("parse error at {span}: expected {expected}, found {found}")]
    Parse {
        span: Span,
        expected: String,
        found: String,
    },
}

impl SyntaxError {
    pub fn span(&self) -> Span {
        match self {
            SyntaxError::Lex { offset, .. } => Span::new(*offset, *offset + 1),
            SyntaxError::Parse { span, .. } => *span,
        }
    }
}

/// One parsed compilation unit: its text plus the tokens and tree derived
/// from it.
#[derive(Clone, Debug)]
pub struct SourceUnit {
    pub text: String,
    pub tokens: Vec<Token>,
    pub ast: Ast,
    pub language: &'static str,
}

impl SourceUnit {
    pub fn parse(name: &str, text: &str) -> Result<SourceUnit, SyntaxError> {
        let tokens = lex(text)?;
        let ast = parse(&tokens, name)?;
        Ok(SourceUnit {
            text: text.to_string(),
            tokens,
            ast,
            language: LANGUAGE,
        })
    }

    pub fn from_tree(name: &str, tree: &Tree) -> Result<SourceUnit, SyntaxError> {
        SourceUnit::parse(name, &print_tree(tree))
    }

    pub fn name(&self) -> &str {
        &self.ast.unit_name
    }

    /// Canonical single-line rendering of the unit.
    pub fn canonical(&self) -> String {
        print(&self.ast)
    }

    /// Re-parses the canonical rendering, so spans refer to canonical text.
    pub fn canonicalized(&self) -> SourceUnit {
        SourceUnit::parse(self.name(), &self.canonical())
            .expect("canonical printing always re-parses")
    }

    pub fn lexemes(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.lexeme.as_str()).collect()
    }

    pub fn slice(&self, span: Span) -> &str {
        &self.text[span.start..span.end]
    }
}

/// Token kind and lexeme pairs, the unit of exact-match comparison.
pub fn token_key(tokens: &[Token]) -> Vec<(TokenKind, &str)> {
    tokens.iter().map(|t| (t.kind, t.lexeme.as_str())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(src: &str) -> SourceUnit {
        SourceUnit::parse("t", src).unwrap()
    }

    fn stmt(src: &str) -> Ast {
        parse_statement(&lex(src).unwrap()).unwrap()
    }

    #[test]
    fn minimal_function_shape() {
        let u = unit("int f(){ return 1; }");
        let ast = &u.ast;
        let f = ast.functions()[0];
        assert_eq!(ast.kind(f), NodeKind::Function);
        let body = ast.children(f)[1];
        assert_eq!(ast.kind(body), NodeKind::Block);
        assert_eq!(ast.children(body).len(), 1);
        assert_eq!(ast.kind(ast.children(body)[0]), NodeKind::Return);
    }

    #[test]
    fn ternary_binds_looser_than_comparison() {
        let ast = stmt("a = b < c ? p : q;");
        let assign = ast.children(ast.root)[0];
        assert_eq!(ast.kind(assign), NodeKind::Assign);
        let rhs = ast.children(assign)[1];
        assert_eq!(ast.kind(rhs), NodeKind::Ternary);
        let cond = ast.children(rhs)[0];
        assert_eq!(ast.kind(cond), NodeKind::Binary);
        assert_eq!(ast.node(cond).text(), Some("<"));
    }

    #[test]
    fn unbraced_if_then() {
        let ast = stmt("if (x) y = 1;");
        assert_eq!(ast.kind(ast.root), NodeKind::If);
        let kids = ast.children(ast.root);
        assert_eq!(kids.len(), 2);
        assert_eq!(ast.kind(kids[1]), NodeKind::ExprStmt);
    }

    #[test]
    fn dangling_else_binds_to_nearest_if() {
        let ast = stmt("if (a) if (b) x = 1; else x = 2;");
        let outer = ast.children(ast.root);
        assert_eq!(outer.len(), 2);
        assert_eq!(ast.children(outer[1]).len(), 3);
    }

    #[test]
    fn assignment_is_right_associative() {
        let ast = stmt("a = b = c;");
        let outer = ast.children(ast.root)[0];
        let rhs = ast.children(outer)[1];
        assert_eq!(ast.kind(rhs), NodeKind::Assign);
    }

    #[test]
    fn precedence_ladder() {
        let e = parse_expression(&lex("a || b && c == d < e + f * -g").unwrap()).unwrap();
        assert_eq!(print(&e), "a || b && c == d < e + f * - g");
        let root = e.node(e.root);
        assert_eq!(root.text(), Some("||"));
        let e = parse_expression(&lex("(a + b) * c").unwrap()).unwrap();
        assert_eq!(e.node(e.root).text(), Some("*"));
        assert_eq!(print(&e), "( a + b ) * c");
    }

    #[test]
    fn canonical_while_loop() {
        let u = unit("void g(int i){while(i<10){i++;}}");
        let body = u.ast.children(u.ast.functions()[0])[1];
        let lp = u.ast.children(body)[0];
        assert_eq!(print_tree(&u.ast.to_tree(lp)), "while ( i < 10 ) { i ++ ; }");
    }

    #[test]
    fn empty_block_prints_braces() {
        assert_eq!(print(&stmt("{}")), "{ }");
    }

    #[test]
    fn for_header_variants_round_trip() {
        for src in [
            "for(;;){}",
            "for(int i=0;i<n;i++) s += i;",
            "for(i=0;;) break;",
            "for(;c;) {}",
        ] {
            let a = stmt(src);
            let b = stmt(&print(&a));
            assert!(a.structurally_eq(&b), "{src}");
        }
    }

    #[test]
    fn parse_errors_carry_span_and_expectation() {
        let err = SourceUnit::parse("t", "int f( { }").unwrap_err();
        match err {
            SyntaxError::Parse { span, expected, .. } => {
                assert_eq!(span, Span::new(7, 8));
                assert_eq!(expected, "type");
            }
            other => panic!("{other:?}"),
        }
        assert!(SourceUnit::parse("t", "int f(){ 1 = x; }").is_err());
        assert!(SourceUnit::parse("t", "int f(){ x++++; }").is_err());
        assert!(SourceUnit::parse("t", "").is_err());
    }

    #[test]
    fn arena_is_single_parented_and_spans_nest() {
        let u = unit("int f(int[] a, int n){ int s = 0; for(int i=0;i<n;i++){ s += a[i]; } return s > 0 ? s : -s; }");
        let ast = &u.ast;
        let mut seen = vec![0usize; ast.len()];
        for n in &ast.nodes {
            let mut last_end = n.span.start;
            for &c in &n.children {
                seen[c.index()] += 1;
                let cs = ast.node(c).span;
                assert!(n.span.contains(&cs), "{:?} !⊇ {:?}", n.kind, ast.kind(c));
                assert!(cs.start >= last_end);
                last_end = cs.end;
            }
        }
        assert_eq!(seen[ast.root.index()], 0);
        assert!(seen.iter().enumerate().all(|(i, &c)| i == ast.root.index() || c == 1));
        assert_eq!(ast.preorder(ast.root).len(), ast.len());
    }

    #[test]
    fn postfix_and_prefix_updates() {
        let e = parse_expression(&lex("i++ < n").unwrap()).unwrap();
        let lhs = e.children(e.root)[0];
        assert_eq!(e.node(lhs).detail, Detail::Unary { postfix: true });
        let e = parse_expression(&lex("--i").unwrap()).unwrap();
        assert_eq!(e.node(e.root).detail, Detail::Unary { postfix: false });
    }
}
