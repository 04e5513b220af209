use std::collections::HashMap;

use crate::syntax::{unquote_str, Ast, Detail, NodeId, NodeKind, SourceUnit, Span, Type};

use super::value::{ErrorKind, EventKind, ExecResult, Status, TraceEvent, Value};

pub const DEFAULT_FUEL: u64 = 100_000;
const MAX_CALL_DEPTH: usize = 64;

/// Deterministic stand-in for functions the unit does not define. The
/// result of the n-th call to a callee depends only on the seed, the callee
/// name and n.
#[derive(Clone, Debug)]
pub struct ExternOracle {
    seed: u64,
    calls: HashMap<String, u64>,
}

impl ExternOracle {
    pub fn new(seed: u64) -> Self {
        ExternOracle {
            seed,
            calls: HashMap::new(),
        }
    }

    pub fn next(&mut self, callee: &str) -> Value {
        let n = self.calls.entry(callee.to_string()).or_insert(0);
        let index = *n;
        *n += 1;
        let mut h = self.seed ^ 0x9e37_79b9_7f4a_7c15;
        for b in callee.bytes() {
            h = splitmix(h ^ u64::from(b));
        }
        h = splitmix(h ^ index);
        Value::Int((h % 129) as i64 - 64)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Runs `entry` with `args`. Never panics on program errors; they surface
/// as [`Status`] values.
pub fn run(unit: &SourceUnit, entry: &str, args: &[Value], oracle: ExternOracle, fuel: u64) -> ExecResult {
    run_ast(&unit.ast, entry, args, oracle, fuel)
}

pub fn run_ast(ast: &Ast, entry: &str, args: &[Value], oracle: ExternOracle, fuel: u64) -> ExecResult {
    let mut m = Machine {
        ast,
        funcs: ast
            .functions()
            .into_iter()
            .filter_map(|f| ast.node(f).text().map(|n| (n, f)))
            .collect(),
        fuel,
        trace: Vec::new(),
        oracle,
        depth: 0,
    };
    let Some(&f) = m.funcs.get(entry) else {
        return ExecResult {
            trace: Vec::new(),
            result: None,
            status: Status::RuntimeError(ErrorKind::UnknownEntry, ast.node(ast.root).span),
        };
    };
    let outcome = m.call_function(f, args.to_vec(), ast.node(f).span);
    let mut trace = m.trace;
    match outcome {
        Ok(result) => {
            trace.push(TraceEvent {
                kind: EventKind::Return,
                callee: None,
                args: Vec::new(),
                returned: result.clone(),
            });
            ExecResult {
                trace,
                result,
                status: Status::Ok,
            }
        }
        Err(Halt::Fuel) => ExecResult {
            trace,
            result: None,
            status: Status::FuelExhausted,
        },
        Err(Halt::Error(kind, span)) => ExecResult {
            trace,
            result: None,
            status: Status::RuntimeError(kind, span),
        },
    }
}

enum Halt {
    Fuel,
    Error(ErrorKind, Span),
}

enum Flow {
    Normal,
    Break,
    Continue,
    Return(Option<Value>),
}

type Exec<T> = Result<T, Halt>;

struct Frame<'a> {
    vars: Vec<(&'a str, Value)>,
    marks: Vec<usize>,
}

impl<'a> Frame<'a> {
    fn push(&mut self) {
        self.marks.push(self.vars.len());
    }

    fn pop(&mut self) {
        let m = self.marks.pop().expect("scope underflow");
        self.vars.truncate(m);
    }

    fn slot(&mut self, name: &str) -> Option<&mut Value> {
        self.vars.iter_mut().rev().find(|(n, _)| *n == name).map(|(_, v)| v)
    }
}

struct Machine<'a> {
    ast: &'a Ast,
    funcs: HashMap<&'a str, NodeId>,
    fuel: u64,
    trace: Vec<TraceEvent>,
    oracle: ExternOracle,
    depth: usize,
}

fn default_value(ty: &Type) -> Value {
    match ty {
        Type::Bool => Value::Bool(false),
        Type::Str => Value::Str(String::new()),
        Type::Array(_) => Value::IntArray(Vec::new()),
        Type::Int | Type::Void => Value::Int(0),
    }
}

impl<'a> Machine<'a> {
    fn tick(&mut self) -> Exec<()> {
        if self.fuel == 0 {
            return Err(Halt::Fuel);
        }
        self.fuel -= 1;
        Ok(())
    }

    fn span(&self, n: NodeId) -> Span {
        self.ast.node(n).span
    }

    fn err<T>(&self, kind: ErrorKind, n: NodeId) -> Exec<T> {
        Err(Halt::Error(kind, self.span(n)))
    }

    fn name(&self, n: NodeId) -> &'a str {
        self.ast.node(n).text().unwrap_or_default()
    }

    fn call_function(&mut self, f: NodeId, args: Vec<Value>, site: Span) -> Exec<Option<Value>> {
        let ast = self.ast;
        let params = ast.children(ast.children(f)[0]);
        if params.len() != args.len() {
            return Err(Halt::Error(ErrorKind::ArityMismatch, site));
        }
        if self.depth >= MAX_CALL_DEPTH {
            return Err(Halt::Error(ErrorKind::CallDepthExceeded, site));
        }
        self.depth += 1;
        let mut frame = Frame {
            vars: params.iter().map(|&p| ast.decl_name(p)).zip(args).collect(),
            marks: Vec::new(),
        };
        let flow = self.stmt(ast.children(f)[1], &mut frame);
        self.depth -= 1;
        match flow? {
            Flow::Return(v) => Ok(v),
            _ => Ok(None),
        }
    }

    fn truthy(&self, v: Value, at: NodeId) -> Exec<bool> {
        match v {
            Value::Bool(b) => Ok(b),
            Value::Int(n) => Ok(n != 0),
            _ => self.err(ErrorKind::TypeMismatch, at),
        }
    }

    fn branch(&mut self, s: NodeId, frame: &mut Frame<'a>) -> Exec<Flow> {
        frame.push();
        let flow = self.stmt(s, frame);
        frame.pop();
        flow
    }

    fn stmt(&mut self, s: NodeId, frame: &mut Frame<'a>) -> Exec<Flow> {
        self.tick()?;
        let ast = self.ast;
        let kids = ast.children(s);
        match ast.kind(s) {
            NodeKind::Block => {
                frame.push();
                let mut flow = Flow::Normal;
                for &c in kids {
                    match self.stmt(c, frame) {
                        Ok(Flow::Normal) => {}
                        Ok(other) => {
                            flow = other;
                            break;
                        }
                        Err(h) => {
                            frame.pop();
                            return Err(h);
                        }
                    }
                }
                frame.pop();
                Ok(flow)
            }
            NodeKind::DeclStmt => {
                let value = match kids.get(1) {
                    Some(&init) => self.expr(init, frame)?,
                    None => default_value(ast.node(s).ty().unwrap_or(&Type::Int)),
                };
                frame.vars.push((ast.decl_name(s), value));
                Ok(Flow::Normal)
            }
            NodeKind::ExprStmt => {
                let e = kids[0];
                if ast.kind(e) == NodeKind::Call {
                    self.call(e, frame)?;
                } else {
                    self.expr(e, frame)?;
                }
                Ok(Flow::Normal)
            }
            NodeKind::If => {
                let c = self.expr(kids[0], frame)?;
                if self.truthy(c, kids[0])? {
                    self.branch(kids[1], frame)
                } else if let Some(&other) = kids.get(2) {
                    self.branch(other, frame)
                } else {
                    Ok(Flow::Normal)
                }
            }
            NodeKind::While => loop {
                let c = self.expr(kids[0], frame)?;
                if !self.truthy(c, kids[0])? {
                    return Ok(Flow::Normal);
                }
                match self.branch(kids[1], frame)? {
                    Flow::Break => return Ok(Flow::Normal),
                    Flow::Return(v) => return Ok(Flow::Return(v)),
                    Flow::Normal | Flow::Continue => {}
                }
                self.tick()?;
            },
            NodeKind::For => {
                let parts = ast.for_parts(s);
                frame.push();
                let result: Exec<Flow> = (|| {
                    if let Some(init) = parts.init {
                        self.stmt(init, frame)?;
                    }
                    loop {
                        if let Some(c) = parts.cond {
                            let v = self.expr(c, frame)?;
                            if !self.truthy(v, c)? {
                                return Ok(Flow::Normal);
                            }
                        }
                        match self.branch(parts.body, frame)? {
                            Flow::Break => return Ok(Flow::Normal),
                            Flow::Return(v) => return Ok(Flow::Return(v)),
                            Flow::Normal | Flow::Continue => {}
                        }
                        if let Some(u) = parts.update {
                            self.expr(u, frame)?;
                        }
                        self.tick()?;
                    }
                })();
                frame.pop();
                result
            }
            NodeKind::Return => match kids.first() {
                Some(&e) => {
                    let v = if ast.kind(e) == NodeKind::Call {
                        self.call(e, frame)?
                    } else {
                        Some(self.expr(e, frame)?)
                    };
                    Ok(Flow::Return(v))
                }
                None => Ok(Flow::Return(None)),
            },
            NodeKind::Break => Ok(Flow::Break),
            NodeKind::Continue => Ok(Flow::Continue),
            other => unreachable!("{other:?} is not a statement"),
        }
    }

    fn lookup(&self, n: NodeId, frame: &mut Frame<'a>) -> Exec<Value> {
        match frame.slot(self.name(n)) {
            Some(v) => Ok(v.clone()),
            None => self.err(ErrorKind::UnboundVariable, n),
        }
    }

    fn int(&self, v: &Value, at: NodeId) -> Exec<i64> {
        match v {
            Value::Int(n) => Ok(*n),
            _ => self.err(ErrorKind::TypeMismatch, at),
        }
    }

    fn arith(&self, op: &str, a: Value, b: Value, at: NodeId) -> Exec<Value> {
        if op == "+" {
            if let (Value::Str(x), Value::Str(y)) = (&a, &b) {
                return Ok(Value::Str(format!("{x}{y}")));
            }
        }
        let (x, y) = (self.int(&a, at)?, self.int(&b, at)?);
        let r = match op {
            "+" => x.wrapping_add(y),
            "-" => x.wrapping_sub(y),
            "*" => x.wrapping_mul(y),
            "/" | "%" if y == 0 => return self.err(ErrorKind::DivisionByZero, at),
            "/" => x.wrapping_div(y),
            "%" => x.wrapping_rem(y),
            _ => unreachable!("arithmetic operator {op}"),
        };
        Ok(Value::Int(r))
    }

    fn compare(&self, op: &str, a: Value, b: Value, at: NodeId) -> Exec<Value> {
        let r = match op {
            "==" | "!=" => {
                if std::mem::discriminant(&a) != std::mem::discriminant(&b) {
                    return self.err(ErrorKind::TypeMismatch, at);
                }
                (a == b) == (op == "==")
            }
            _ => {
                let (x, y) = (self.int(&a, at)?, self.int(&b, at)?);
                match op {
                    "<" => x < y,
                    "<=" => x <= y,
                    ">" => x > y,
                    ">=" => x >= y,
                    _ => unreachable!("comparison operator {op}"),
                }
            }
        };
        Ok(Value::Bool(r))
    }

    fn index_of(&self, idx: &Value, len: usize, at: NodeId) -> Exec<usize> {
        let i = self.int(idx, at)?;
        if i < 0 || i as u64 >= len as u64 {
            return self.err(ErrorKind::IndexOutOfBounds, at);
        }
        Ok(i as usize)
    }

    /// Applies `update` to the location named by `target` and returns
    /// `(old, new)`.
    fn modify(
        &mut self,
        target: NodeId,
        frame: &mut Frame<'a>,
        update: &mut dyn FnMut(&Self, Value) -> Exec<Value>,
    ) -> Exec<(Value, Value)> {
        let ast = self.ast;
        match ast.kind(target) {
            NodeKind::Identifier => {
                let name = self.name(target);
                let old = match frame.slot(name) {
                    Some(v) => v.clone(),
                    None => return self.err(ErrorKind::UnboundVariable, target),
                };
                let new = update(self, old.clone())?;
                *frame.slot(name).unwrap() = new.clone();
                Ok((old, new))
            }
            NodeKind::Index => {
                let (base, idx) = (ast.children(target)[0], ast.children(target)[1]);
                if ast.kind(base) != NodeKind::Identifier {
                    return self.err(ErrorKind::InvalidTarget, target);
                }
                let i = self.expr(idx, frame)?;
                // The right-hand side, if any, is evaluated inside `update`
                // by the caller before this point; see `assign`.
                let name = self.name(base);
                let len = match frame.slot(name) {
                    Some(Value::IntArray(xs)) => xs.len(),
                    Some(_) => return self.err(ErrorKind::TypeMismatch, base),
                    None => return self.err(ErrorKind::UnboundVariable, base),
                };
                let i = self.index_of(&i, len, target)?;
                let old = match frame.slot(name) {
                    Some(Value::IntArray(xs)) => Value::Int(xs[i]),
                    _ => unreachable!(),
                };
                let new = update(self, old.clone())?;
                let n = self.int(&new, target)?;
                if let Some(Value::IntArray(xs)) = frame.slot(name) {
                    xs[i] = n;
                }
                Ok((old, new))
            }
            _ => self.err(ErrorKind::InvalidTarget, target),
        }
    }

    fn assign(&mut self, e: NodeId, frame: &mut Frame<'a>) -> Exec<Value> {
        let ast = self.ast;
        let op = self.name(e);
        let (lhs, rhs) = (ast.children(e)[0], ast.children(e)[1]);
        // Index expression first, then the right-hand side, then the store.
        if ast.kind(lhs) == NodeKind::Index {
            let (base, idx) = (ast.children(lhs)[0], ast.children(lhs)[1]);
            if ast.kind(base) != NodeKind::Identifier {
                return self.err(ErrorKind::InvalidTarget, lhs);
            }
            let i = self.expr(idx, frame)?;
            let r = self.expr(rhs, frame)?;
            let name = self.name(base);
            let arr = match frame.slot(name) {
                Some(Value::IntArray(xs)) => xs.clone(),
                Some(_) => return self.err(ErrorKind::TypeMismatch, base),
                None => return self.err(ErrorKind::UnboundVariable, base),
            };
            let i = self.index_of(&i, arr.len(), lhs)?;
            let new = if op == "=" {
                r
            } else {
                self.arith(&op[..1], Value::Int(arr[i]), r, e)?
            };
            let n = self.int(&new, e)?;
            if let Some(Value::IntArray(xs)) = frame.slot(name) {
                xs[i] = n;
            }
            return Ok(new);
        }
        let r = self.expr(rhs, frame)?;
        let (_, new) = self.modify(lhs, frame, &mut |m, old| {
            if op == "=" {
                Ok(r.clone())
            } else {
                m.arith(&op[..1], old, r.clone(), e)
            }
        })?;
        Ok(new)
    }

    fn call(&mut self, e: NodeId, frame: &mut Frame<'a>) -> Exec<Option<Value>> {
        let ast = self.ast;
        let callee = self.name(e);
        let mut args = Vec::with_capacity(ast.children(e).len());
        for &a in ast.children(e) {
            args.push(self.expr(a, frame)?);
        }
        if callee == "len" && !self.funcs.contains_key("len") {
            return match args.as_slice() {
                [Value::IntArray(xs)] => Ok(Some(Value::Int(xs.len() as i64))),
                [Value::Str(s)] => Ok(Some(Value::Int(s.len() as i64))),
                [_] => self.err(ErrorKind::TypeMismatch, e),
                _ => self.err(ErrorKind::ArityMismatch, e),
            };
        }
        if let Some(&f) = self.funcs.get(callee) {
            return self.call_function(f, args, self.span(e));
        }
        let returned = self.oracle.next(callee);
        self.trace.push(TraceEvent {
            kind: EventKind::ExternCall,
            callee: Some(callee.to_string()),
            args,
            returned: Some(returned.clone()),
        });
        Ok(Some(returned))
    }

    fn expr(&mut self, e: NodeId, frame: &mut Frame<'a>) -> Exec<Value> {
        self.tick()?;
        let ast = self.ast;
        let kids = ast.children(e);
        match ast.kind(e) {
            NodeKind::IntLit => Ok(Value::Int(self.name(e).parse().unwrap_or(0))),
            NodeKind::BoolLit => Ok(Value::Bool(self.name(e) == "true")),
            NodeKind::StrLit => Ok(Value::Str(unquote_str(self.name(e)))),
            NodeKind::Identifier => self.lookup(e, frame),
            NodeKind::Assign => self.assign(e, frame),
            NodeKind::Unary => {
                let op = self.name(e);
                match op {
                    "!" => {
                        let v = self.expr(kids[0], frame)?;
                        Ok(Value::Bool(!self.truthy(v, kids[0])?))
                    }
                    "-" => {
                        let v = self.expr(kids[0], frame)?;
                        Ok(Value::Int(self.int(&v, kids[0])?.wrapping_neg()))
                    }
                    _ => {
                        let delta = if op == "++" { 1 } else { -1 };
                        let (old, new) = self.modify(kids[0], frame, &mut |m, old| {
                            Ok(Value::Int(m.int(&old, e)?.wrapping_add(delta)))
                        })?;
                        let postfix = matches!(ast.node(e).detail, Detail::Unary { postfix: true });
                        Ok(if postfix { old } else { new })
                    }
                }
            }
            NodeKind::Binary => {
                let op = self.name(e);
                match op {
                    "&&" | "||" => {
                        let l = self.expr(kids[0], frame)?;
                        let l = self.truthy(l, kids[0])?;
                        if (op == "&&") != l {
                            return Ok(Value::Bool(l));
                        }
                        let r = self.expr(kids[1], frame)?;
                        Ok(Value::Bool(self.truthy(r, kids[1])?))
                    }
                    _ => {
                        let l = self.expr(kids[0], frame)?;
                        let r = self.expr(kids[1], frame)?;
                        match op {
                            "+" | "-" | "*" | "/" | "%" => self.arith(op, l, r, e),
                            _ => self.compare(op, l, r, e),
                        }
                    }
                }
            }
            NodeKind::Ternary => {
                let c = self.expr(kids[0], frame)?;
                if self.truthy(c, kids[0])? {
                    self.expr(kids[1], frame)
                } else {
                    self.expr(kids[2], frame)
                }
            }
            NodeKind::Index => {
                let base = self.expr(kids[0], frame)?;
                let idx = self.expr(kids[1], frame)?;
                match base {
                    Value::IntArray(xs) => {
                        let i = self.index_of(&idx, xs.len(), e)?;
                        Ok(Value::Int(xs[i]))
                    }
                    _ => self.err(ErrorKind::TypeMismatch, kids[0]),
                }
            }
            NodeKind::Call => match self.call(e, frame)? {
                Some(v) => Ok(v),
                None => self.err(ErrorKind::VoidValue, e),
            },
            other => unreachable!("{other:?} is not an expression"),
        }
    }
}
