use std::fmt;

use crate::syntax::Span;

/// Runtime value. Integer arithmetic wraps on overflow.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Str(String),
    IntArray(Vec<i64>),
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Bool(_) => "bool",
            Value::Str(_) => "str",
            Value::IntArray(_) => "int[]",
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => f.write_str(&crate::syntax::quote_str(s)),
            Value::IntArray(xs) => {
                f.write_str("[")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str("]")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EventKind {
    ExternCall,
    Return,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub kind: EventKind,
    /// Set for extern calls.
    pub callee: Option<String>,
    pub args: Vec<Value>,
    /// Stub result for extern calls; the entry's result for `Return`.
    pub returned: Option<Value>,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: &Option<Value>| v.as_ref().map_or_else(|| "void".to_string(), Value::to_string);
        match self.kind {
            EventKind::ExternCall => {
                let args: Vec<String> = self.args.iter().map(Value::to_string).collect();
                write!(
                    f,
                    "call {}({}) -> {}",
                    self.callee.as_deref().unwrap_or("?"),
                    args.join(", "),
                    show(&self.returned)
                )
            }
            EventKind::Return => write!(f, "return {}", show(&self.returned)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    DivisionByZero,
    IndexOutOfBounds,
    TypeMismatch,
    UnboundVariable,
    ArityMismatch,
    CallDepthExceeded,
    VoidValue,
    InvalidTarget,
    UnknownEntry,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    FuelExhausted,
    RuntimeError(ErrorKind, Span),
}

impl Status {
    /// Same outcome ignoring error spans, which necessarily differ between
    /// a unit and its rewrite.
    pub fn same_outcome(&self, other: &Status) -> bool {
        match (self, other) {
            (Status::RuntimeError(a, _), Status::RuntimeError(b, _)) => a == b,
            (a, b) => a == b,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Ok => f.write_str("ok"),
            Status::FuelExhausted => f.write_str("fuel exhausted"),
            Status::RuntimeError(kind, span) => write!(f, "runtime error {kind:?} at {span}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecResult {
    pub trace: Vec<TraceEvent>,
    pub result: Option<Value>,
    pub status: Status,
}

impl ExecResult {
    /// Observable equality: trace, result and status kind.
    pub fn same_behavior(&self, other: &ExecResult) -> bool {
        self.trace == other.trace && self.result == other.result && self.status.same_outcome(&other.status)
    }
}

impl fmt::Display for ExecResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.status)?;
        if let Some(v) = &self.result {
            write!(f, ", result {v}")?;
        }
        for e in &self.trace {
            write!(f, "; {e}")?;
        }
        Ok(())
    }
}
