use super::ast::{Ast, AstNode, Detail, NodeId, NodeKind, Span, Type};
use super::lexer::{Token, TokenKind};
use super::SyntaxError;

pub const ASSIGN_OPS: &[&str] = &["=", "+=", "-=", "*=", "/=", "%="];

/// Binary operator levels from loosest to tightest.
const BINARY_LEVELS: &[&[&str]] = &[
    &["||"],
    &["&&"],
    &["==", "!="],
    &["<", "<=", ">", ">="],
    &["+", "-"],
    &["*", "/", "%"],
];

pub fn parse(tokens: &[Token], unit_name: &str) -> Result<Ast, SyntaxError> {
    let mut p = Parser::new(tokens);
    let root = p.unit()?;
    Ok(p.finish(root, unit_name))
}

/// Parses a single expression covering the whole token list.
pub fn parse_expression(tokens: &[Token]) -> Result<Ast, SyntaxError> {
    let mut p = Parser::new(tokens);
    let root = p.expr()?;
    p.expect_end()?;
    Ok(p.finish(root, "<expr>"))
}

/// Parses a single statement covering the whole token list.
pub fn parse_statement(tokens: &[Token]) -> Result<Ast, SyntaxError> {
    let mut p = Parser::new(tokens);
    let root = p.stmt()?;
    p.expect_end()?;
    Ok(p.finish(root, "<stmt>"))
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    nodes: Vec<AstNode>,
}

impl<'t> Parser<'t> {
    fn new(tokens: &'t [Token]) -> Self {
        Parser {
            tokens,
            pos: 0,
            nodes: Vec::new(),
        }
    }

    fn finish(self, root: NodeId, unit_name: &str) -> Ast {
        Ast {
            root,
            nodes: self.nodes,
            unit_name: unit_name.to_string(),
        }
    }

    fn peek(&self) -> Option<&'t Token> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, n: usize) -> Option<&'t Token> {
        self.tokens.get(self.pos + n)
    }

    fn peek_is(&self, lexeme: &str) -> bool {
        self.peek().is_some_and(|t| t.is(lexeme))
    }

    fn bump(&mut self) -> &'t Token {
        let t = &self.tokens[self.pos];
        self.pos += 1;
        t
    }

    fn eat(&mut self, lexeme: &str) -> Option<&'t Token> {
        if self.peek_is(lexeme) {
            Some(self.bump())
        } else {
            None
        }
    }

    fn here(&self) -> Span {
        match self.peek() {
            Some(t) => t.span,
            None => {
                let end = self.tokens.last().map_or(0, |t| t.span.end);
                Span::new(end, end)
            }
        }
    }

    fn start(&self) -> usize {
        self.here().start
    }

    fn prev_end(&self) -> usize {
        self.pos
            .checked_sub(1)
            .map_or(0, |i| self.tokens[i].span.end)
    }

    fn error(&self, expected: &str) -> SyntaxError {
        SyntaxError::Parse {
            span: self.here(),
            expected: expected.to_string(),
            found: self
                .peek()
                .map_or_else(|| "end of input".to_string(), |t| format!("`{}`", t.lexeme)),
        }
    }

    fn expect(&mut self, lexeme: &str) -> Result<&'t Token, SyntaxError> {
        self.eat(lexeme).ok_or_else(|| self.error(&format!("`{lexeme}`")))
    }

    fn expect_end(&self) -> Result<(), SyntaxError> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.error("end of input")),
        }
    }

    fn expect_ident(&mut self) -> Result<&'t Token, SyntaxError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Identifier => Ok(self.bump()),
            _ => Err(self.error("identifier")),
        }
    }

    fn push(
        &mut self,
        kind: NodeKind,
        children: Vec<NodeId>,
        token: Option<Token>,
        start: usize,
        detail: Detail,
    ) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        let span = Span::new(start, self.prev_end().max(start));
        self.nodes.push(AstNode {
            id,
            kind,
            children,
            token,
            span,
            detail,
        });
        id
    }

    fn leaf(&mut self, kind: NodeKind, token: &Token) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(AstNode {
            id,
            kind,
            children: Vec::new(),
            token: Some(token.clone()),
            span: token.span,
            detail: Detail::None,
        });
        id
    }

    fn unit(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.start();
        let mut funcs = Vec::new();
        loop {
            funcs.push(self.function()?);
            if self.peek().is_none() {
                break;
            }
        }
        Ok(self.push(NodeKind::Unit, funcs, None, start, Detail::None))
    }

    fn at_type(&self) -> bool {
        self.peek()
            .is_some_and(|t| t.kind == TokenKind::Keyword && matches!(t.lexeme.as_str(), "int" | "bool" | "str" | "void"))
    }

    fn ty(&mut self) -> Result<Type, SyntaxError> {
        let mut ty = match self.peek().map(|t| t.lexeme.as_str()) {
            Some("int") if self.at_type() => Type::Int,
            Some("bool") if self.at_type() => Type::Bool,
            Some("str") if self.at_type() => Type::Str,
            Some("void") if self.at_type() => Type::Void,
            _ => return Err(self.error("type")),
        };
        self.bump();
        while self.peek_is("[") && self.peek_at(1).is_some_and(|t| t.is("]")) {
            self.bump();
            self.bump();
            ty = Type::Array(Box::new(ty));
        }
        Ok(ty)
    }

    fn function(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.start();
        let ret = self.ty()?;
        let name = self.expect_ident()?;
        let params_start = self.start();
        self.expect("(")?;
        let mut params = Vec::new();
        if !self.peek_is(")") {
            loop {
                let p_start = self.start();
                let ty = self.ty()?;
                let ident = self.expect_ident()?;
                let ident = self.leaf(NodeKind::Identifier, ident);
                params.push(self.push(NodeKind::DeclStmt, vec![ident], None, p_start, Detail::Typed(ty)));
                if self.eat(",").is_none() {
                    break;
                }
            }
        }
        self.expect(")")?;
        let param_list = self.push(NodeKind::ParamList, params, None, params_start, Detail::None);
        let body = self.block()?;
        Ok(self.push(
            NodeKind::Function,
            vec![param_list, body],
            Some(name.clone()),
            start,
            Detail::Typed(ret),
        ))
    }

    fn block(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.start();
        self.expect("{")?;
        let mut stmts = Vec::new();
        while !self.peek_is("}") {
            if self.peek().is_none() {
                return Err(self.error("`}`"));
            }
            stmts.push(self.stmt()?);
        }
        self.bump();
        Ok(self.push(NodeKind::Block, stmts, None, start, Detail::None))
    }

    fn stmt(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.start();
        let Some(tok) = self.peek() else {
            return Err(self.error("statement"));
        };
        if tok.is("{") {
            return self.block();
        }
        if self.at_type() {
            return self.decl_stmt();
        }
        if tok.kind == TokenKind::Keyword {
            match tok.lexeme.as_str() {
                "if" => {
                    self.bump();
                    self.expect("(")?;
                    let cond = self.expr()?;
                    self.expect(")")?;
                    let then = self.stmt()?;
                    let mut children = vec![cond, then];
                    if self.eat("else").is_some() {
                        children.push(self.stmt()?);
                    }
                    return Ok(self.push(NodeKind::If, children, None, start, Detail::None));
                }
                "while" => {
                    self.bump();
                    self.expect("(")?;
                    let cond = self.expr()?;
                    self.expect(")")?;
                    let body = self.stmt()?;
                    return Ok(self.push(NodeKind::While, vec![cond, body], None, start, Detail::None));
                }
                "for" => return self.for_stmt(),
                "return" => {
                    self.bump();
                    let mut children = Vec::new();
                    if !self.peek_is(";") {
                        children.push(self.expr()?);
                    }
                    self.expect(";")?;
                    return Ok(self.push(NodeKind::Return, children, None, start, Detail::None));
                }
                "break" | "continue" => {
                    let kind = if tok.lexeme == "break" {
                        NodeKind::Break
                    } else {
                        NodeKind::Continue
                    };
                    self.bump();
                    self.expect(";")?;
                    return Ok(self.push(kind, Vec::new(), None, start, Detail::None));
                }
                _ => {}
            }
        }
        self.expr_stmt()
    }

    fn decl_stmt(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.start();
        let ty = self.ty()?;
        let ident = self.expect_ident()?;
        let ident = self.leaf(NodeKind::Identifier, ident);
        let mut children = vec![ident];
        if self.eat("=").is_some() {
            children.push(self.expr()?);
        }
        self.expect(";")?;
        Ok(self.push(NodeKind::DeclStmt, children, None, start, Detail::Typed(ty)))
    }

    fn expr_stmt(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.start();
        let e = self.expr()?;
        self.expect(";")?;
        Ok(self.push(NodeKind::ExprStmt, vec![e], None, start, Detail::None))
    }

    fn for_stmt(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.start();
        self.expect("for")?;
        self.expect("(")?;
        let mut children = Vec::new();
        let init = if self.eat(";").is_some() {
            false
        } else {
            let s = if self.at_type() {
                self.decl_stmt()?
            } else {
                self.expr_stmt()?
            };
            children.push(s);
            true
        };
        let cond = if self.peek_is(";") {
            false
        } else {
            children.push(self.expr()?);
            true
        };
        self.expect(";")?;
        let update = if self.peek_is(")") {
            false
        } else {
            children.push(self.expr()?);
            true
        };
        self.expect(")")?;
        children.push(self.stmt()?);
        Ok(self.push(NodeKind::For, children, None, start, Detail::For { init, cond, update }))
    }

    pub fn expr(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.start();
        let lhs = self.ternary()?;
        if let Some(op) = self.peek().filter(|t| t.kind == TokenKind::Operator && ASSIGN_OPS.contains(&t.lexeme.as_str())) {
            if !matches!(self.nodes[lhs.index()].kind, NodeKind::Identifier | NodeKind::Index) {
                return Err(SyntaxError::Parse {
                    span: self.nodes[lhs.index()].span,
                    expected: "assignable expression (identifier or index)".into(),
                    found: format!("`{}`", op.lexeme),
                });
            }
            self.bump();
            let rhs = self.expr()?;
            return Ok(self.push(NodeKind::Assign, vec![lhs, rhs], Some(op.clone()), start, Detail::None));
        }
        Ok(lhs)
    }

    fn ternary(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.start();
        let cond = self.binary(0)?;
        if self.eat("?").is_some() {
            let then = self.expr()?;
            self.expect(":")?;
            let other = self.ternary()?;
            return Ok(self.push(NodeKind::Ternary, vec![cond, then, other], None, start, Detail::None));
        }
        Ok(cond)
    }

    fn binary(&mut self, level: usize) -> Result<NodeId, SyntaxError> {
        if level == BINARY_LEVELS.len() {
            return self.unary();
        }
        let start = self.start();
        let mut lhs = self.binary(level + 1)?;
        while let Some(op) = self
            .peek()
            .filter(|t| t.kind == TokenKind::Operator && BINARY_LEVELS[level].contains(&t.lexeme.as_str()))
        {
            self.bump();
            let rhs = self.binary(level + 1)?;
            lhs = self.push(NodeKind::Binary, vec![lhs, rhs], Some(op.clone()), start, Detail::None);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.start();
        if let Some(op) = self
            .peek()
            .filter(|t| t.kind == TokenKind::Operator && matches!(t.lexeme.as_str(), "!" | "-" | "++" | "--"))
        {
            self.bump();
            let operand = self.unary()?;
            if matches!(op.lexeme.as_str(), "++" | "--") {
                self.check_lvalue(operand, op)?;
            }
            return Ok(self.push(
                NodeKind::Unary,
                vec![operand],
                Some(op.clone()),
                start,
                Detail::Unary { postfix: false },
            ));
        }
        self.postfix()
    }

    fn check_lvalue(&self, id: NodeId, op: &Token) -> Result<(), SyntaxError> {
        if matches!(self.nodes[id.index()].kind, NodeKind::Identifier | NodeKind::Index) {
            Ok(())
        } else {
            Err(SyntaxError::Parse {
                span: self.nodes[id.index()].span,
                expected: "assignable expression (identifier or index)".into(),
                found: format!("`{}`", op.lexeme),
            })
        }
    }

    fn postfix(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.start();
        let mut e = self.primary()?;
        loop {
            if self.eat("[").is_some() {
                let idx = self.expr()?;
                self.expect("]")?;
                e = self.push(NodeKind::Index, vec![e, idx], None, start, Detail::None);
            } else if let Some(op) = self.peek().filter(|t| t.is("++") || t.is("--")) {
                self.check_lvalue(e, op)?;
                self.bump();
                e = self.push(NodeKind::Unary, vec![e], Some(op.clone()), start, Detail::Unary { postfix: true });
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> Result<NodeId, SyntaxError> {
        let start = self.start();
        let Some(tok) = self.peek() else {
            return Err(self.error("expression"));
        };
        match tok.kind {
            TokenKind::IntLiteral => {
                self.bump();
                Ok(self.leaf(NodeKind::IntLit, tok))
            }
            TokenKind::StrLiteral => {
                self.bump();
                Ok(self.leaf(NodeKind::StrLit, tok))
            }
            TokenKind::Keyword if tok.lexeme == "true" || tok.lexeme == "false" => {
                self.bump();
                Ok(self.leaf(NodeKind::BoolLit, tok))
            }
            TokenKind::Identifier => {
                self.bump();
                if self.eat("(").is_some() {
                    let mut args = Vec::new();
                    if !self.peek_is(")") {
                        loop {
                            args.push(self.expr()?);
                            if self.eat(",").is_none() {
                                break;
                            }
                        }
                    }
                    self.expect(")")?;
                    Ok(self.push(NodeKind::Call, args, Some(tok.clone()), start, Detail::None))
                } else {
                    Ok(self.leaf(NodeKind::Identifier, tok))
                }
            }
            TokenKind::Punctuation if tok.lexeme == "(" => {
                self.bump();
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            _ => Err(self.error("expression")),
        }
    }
}
