//! Reference interpreter for MiniLang and a differential equivalence check
//! built on it.
//!
//! Execution is fuel-bounded and deterministic. Calls to functions the unit
//! does not define are answered by a seeded [`ExternOracle`] and recorded in
//! the trace, so two programs that make the same external calls with the
//! same arguments see the same answers.
//!
//! ```
//! use denat::interp::{run, ExternOracle, Value, DEFAULT_FUEL};
//! use denat::syntax::SourceUnit;
//!
//! let unit = SourceUnit::parse("demo", "int sq(int x) { return x * x; }").unwrap();
//! let out = run(&unit, "sq", &[Value::Int(7)], ExternOracle::new(0), DEFAULT_FUEL);
//! assert_eq!(out.result, Some(Value::Int(49)));
//! ```

mod exec;
mod value;

pub use exec::{run, run_ast, ExternOracle, DEFAULT_FUEL};
pub use value::{ErrorKind, EventKind, ExecResult, Status, TraceEvent, Value};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::syntax::{NodeKind, SourceUnit, Type};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EquivError {
    #[error("no function named `{0}`")]
    UnknownEntry(String),
    #[error("`{0}` has different parameter types in the two units")]
    SignatureMismatch(String),
    #[error("cannot generate arguments of type {0}")]
    UnsupportedParam(Type),
}

/// A concrete input on which two programs behave differently.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub args: Vec<Value>,
    pub oracle_seed: u64,
    pub left: ExecResult,
    pub right: ExecResult,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Equivalent,
    /// Some trials ran out of fuel on both sides with no disagreement seen.
    Inconclusive { exhausted: usize },
    Divergent(Box<Witness>),
}

impl Verdict {
    pub fn is_divergent(&self) -> bool {
        matches!(self, Verdict::Divergent(_))
    }
}

/// Parameter types of `entry`, or `None` if the unit has no such function.
pub fn signature(unit: &SourceUnit, entry: &str) -> Option<Vec<Type>> {
    let ast = &unit.ast;
    let f = ast.function_named(entry)?;
    let params = ast.children(f)[0];
    Some(
        ast.children(params)
            .iter()
            .map(|&p| ast.node(p).ty().cloned().unwrap_or(Type::Int))
            .collect(),
    )
}

/// Draws one random argument of type `ty`.
pub fn random_value(ty: &Type, rng: &mut ChaCha8Rng) -> Result<Value, EquivError> {
    Ok(match ty {
        Type::Int => Value::Int(rng.gen_range(-64..=64)),
        Type::Bool => Value::Bool(rng.gen()),
        Type::Str => {
            let n = rng.gen_range(0..4);
            Value::Str((0..n).map(|_| rng.gen_range(b'a'..=b'e') as char).collect())
        }
        Type::Array(inner) if **inner == Type::Int => {
            let n = rng.gen_range(0..=8);
            Value::IntArray((0..n).map(|_| rng.gen_range(-64..=64)).collect())
        }
        other => return Err(EquivError::UnsupportedParam(other.clone())),
    })
}

fn prefix_compatible(a: &[TraceEvent], b: &[TraceEvent]) -> bool {
    let n = a.len().min(b.len());
    a[..n] == b[..n]
}

/// Runs `entry` in both units on `trials` random inputs and compares trace,
/// result and status. Both sides of a trial share the arguments and the
/// extern oracle seed.
pub fn equivalent(
    a: &SourceUnit,
    b: &SourceUnit,
    entry: &str,
    trials: usize,
    seed: u64,
) -> Result<Verdict, EquivError> {
    equivalent_with_fuel(a, b, entry, trials, seed, DEFAULT_FUEL)
}

pub fn equivalent_with_fuel(
    a: &SourceUnit,
    b: &SourceUnit,
    entry: &str,
    trials: usize,
    seed: u64,
    fuel: u64,
) -> Result<Verdict, EquivError> {
    let sig = signature(a, entry).ok_or_else(|| EquivError::UnknownEntry(entry.to_string()))?;
    let other = signature(b, entry).ok_or_else(|| EquivError::UnknownEntry(entry.to_string()))?;
    if sig != other {
        return Err(EquivError::SignatureMismatch(entry.to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut exhausted = 0;
    for _ in 0..trials {
        let args = sig
            .iter()
            .map(|t| random_value(t, &mut rng))
            .collect::<Result<Vec<_>, _>>()?;
        let oracle_seed: u64 = rng.gen();
        let left = run(a, entry, &args, ExternOracle::new(oracle_seed), fuel);
        let right = run(b, entry, &args, ExternOracle::new(oracle_seed), fuel);
        let both_out = left.status == Status::FuelExhausted && right.status == Status::FuelExhausted;
        if both_out && prefix_compatible(&left.trace, &right.trace) {
            exhausted += 1;
            continue;
        }
        if !left.same_behavior(&right) {
            return Ok(Verdict::Divergent(Box::new(Witness {
                args,
                oracle_seed,
                left,
                right,
            })));
        }
    }
    Ok(if exhausted > 0 {
        Verdict::Inconclusive { exhausted }
    } else {
        Verdict::Equivalent
    })
}

/// Names of every function defined in the unit.
pub fn entry_points(unit: &SourceUnit) -> Vec<String> {
    let ast = &unit.ast;
    ast.children(ast.root)
        .iter()
        .filter(|&&f| ast.kind(f) == NodeKind::Function)
        .filter_map(|&f| ast.node(f).text().map(str::to_string))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const BSEARCH: &str = "int binarySearch(int[] arr, int key) { int low = 0; int high = len(arr) - 1; \
        while (low <= high) { int mid = (low + high) / 2; if (arr[mid] == key) { return mid; } \
        if (arr[mid] < key) { low = mid + 1; } else { high = mid - 1; } } return -1; }";

    fn unit(src: &str) -> SourceUnit {
        SourceUnit::parse("t", src).unwrap()
    }

    fn call(src: &str, entry: &str, args: &[Value]) -> ExecResult {
        run(&unit(src), entry, args, ExternOracle::new(1), DEFAULT_FUEL)
    }

    #[test]
    fn binary_search_finds_key() {
        let arr = Value::IntArray(vec![1, 3, 5, 7]);
        let out = call(BSEARCH, "binarySearch", &[arr.clone(), Value::Int(5)]);
        assert_eq!(out.status, Status::Ok);
        assert_eq!(out.result, Some(Value::Int(2)));
        let out = call(BSEARCH, "binarySearch", &[arr, Value::Int(4)]);
        assert_eq!(out.result, Some(Value::Int(-1)));
    }

    #[test]
    fn infinite_loop_runs_out_of_fuel() {
        let u = unit("void spin() { while (true) { } }");
        let out = run(&u, "spin", &[], ExternOracle::new(0), 1000);
        assert_eq!(out.status, Status::FuelExhausted);
        assert!(out.trace.is_empty());
    }

    #[test]
    fn runtime_errors_are_statuses() {
        let out = call("int f(int x) { return 10 / x; }", "f", &[Value::Int(0)]);
        assert!(matches!(out.status, Status::RuntimeError(ErrorKind::DivisionByZero, _)));
        let out = call("int f(int[] a) { return a[3]; }", "f", &[Value::IntArray(vec![1])]);
        assert!(matches!(out.status, Status::RuntimeError(ErrorKind::IndexOutOfBounds, _)));
        let out = call("int f() { return g; }", "f", &[]);
        assert!(matches!(out.status, Status::RuntimeError(ErrorKind::UnboundVariable, _)));
        let out = call("int f() { return 1; }", "nope", &[]);
        assert!(matches!(out.status, Status::RuntimeError(ErrorKind::UnknownEntry, _)));
    }

    #[test]
    fn arithmetic_wraps() {
        let out = call("int f(int x) { return x * x * x * x * x; }", "f", &[Value::Int(i64::MAX)]);
        assert_eq!(out.result, Some(Value::Int(i64::MAX)));
    }

    #[test]
    fn extern_calls_are_traced() {
        let src = "int f(int x) { int a = ext(x); log(a, \"hi\"); return ext(x + 1); }";
        let out = call(src, "f", &[Value::Int(3)]);
        let names: Vec<_> = out.trace.iter().filter_map(|e| e.callee.as_deref()).collect();
        assert_eq!(names, ["ext", "log", "ext"]);
        assert_eq!(out.trace[1].args[1], Value::Str("hi".into()));
        assert_eq!(out.trace.last().unwrap().kind, EventKind::Return);
        assert_eq!(out.trace.last().unwrap().returned, out.result);
        // Replay gives identical answers.
        assert_eq!(out, call(src, "f", &[Value::Int(3)]));
    }

    #[test]
    fn for_loop_continue_runs_update() {
        let src = "int f() { int s = 0; for (int i = 0; i < 5; i++) { if (i == 2) continue; s += i; } return s; }";
        assert_eq!(call(src, "f", &[]).result, Some(Value::Int(8)));
    }

    #[test]
    fn postfix_prefix_and_compound() {
        let src = "int f() { int[] a; int i = 0; int x = i++; int y = ++i; x += 10; x -= y; return x * 100 + i; }";
        assert_eq!(call(src, "f", &[]).result, Some(Value::Int(802)));
        let src = "int f(int[] a) { a[1] += 5; a[0]++; return a[0] * 10 + a[1]; }";
        assert_eq!(call(src, "f", &[Value::IntArray(vec![1, 2])]).result, Some(Value::Int(27)));
    }

    #[test]
    fn short_circuit_skips_right_side() {
        let src = "bool f(int x) { return x != 0 && 10 / x > 1; }";
        assert_eq!(call(src, "f", &[Value::Int(0)]).result, Some(Value::Bool(false)));
    }

    #[test]
    fn user_calls_and_recursion() {
        let src = "int fact(int n) { if (n <= 1) return 1; return n * fact(n - 1); }";
        assert_eq!(call(src, "fact", &[Value::Int(10)]).result, Some(Value::Int(3_628_800)));
        let deep = call("int f(int n) { return f(n + 1); }", "f", &[Value::Int(0)]);
        assert!(matches!(deep.status, Status::RuntimeError(ErrorKind::CallDepthExceeded, _)));
    }

    #[test]
    fn equivalence_is_reflexive() {
        let u = unit(BSEARCH);
        assert_eq!(equivalent(&u, &u, "binarySearch", 32, 7).unwrap(), Verdict::Equivalent);
    }

    #[test]
    fn swapped_branches_are_caught() {
        let a = unit("int f(int x) { if (x < 0) { return 1; } else { return 2; } }");
        let b = unit("int f(int x) { if (x < 0) { return 2; } else { return 1; } }");
        assert!(equivalent(&a, &b, "f", 16, 3).unwrap().is_divergent());
        let c = unit("int f(int x) { if (!(x < 0)) { return 2; } else { return 1; } }");
        assert_eq!(equivalent(&a, &c, "f", 64, 3).unwrap(), Verdict::Equivalent);
    }

    #[test]
    fn both_sides_spinning_is_inconclusive() {
        let a = unit("void f() { while (true) { } }");
        let b = unit("void f() { for (;;) { } }");
        let v = equivalent_with_fuel(&a, &b, "f", 4, 0, 500).unwrap();
        assert_eq!(v, Verdict::Inconclusive { exhausted: 4 });
    }

    #[test]
    fn signature_mismatch_is_an_error() {
        let a = unit("int f(int x) { return x; }");
        let b = unit("int f(bool x) { return 1; }");
        assert_eq!(
            equivalent(&a, &b, "f", 1, 0),
            Err(EquivError::SignatureMismatch("f".into()))
        );
    }
}
