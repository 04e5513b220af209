//! Seeded random MiniLang programs for differential testing.
//!
//! Generated functions are well typed, always terminate (loop counters are
//! never written by the body and bounds are small constants), and report
//! intermediate state through calls to an undefined `emit` function, so the
//! interpreter's trace reflects most of what the program does.
//!
//! ```
//! use denat::gen::generate_program;
//! use denat::syntax::SourceUnit;
//!
//! let text = generate_program(42);
//! assert!(SourceUnit::parse("g", &text).is_ok());
//! assert_eq!(text, generate_program(42));
//! ```

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct GenConfig {
    /// Maximum nesting of loops and conditionals.
    pub max_depth: usize,
    /// Statements in a function body, before the final return.
    pub min_statements: usize,
    pub max_statements: usize,
    /// Chance of a second function that the first one calls.
    pub helper_probability: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_depth: 2,
            min_statements: 5,
            max_statements: 10,
            helper_probability: 0.3,
        }
    }
}

pub fn generate_program(seed: u64) -> String {
    generate_with(&GenConfig::default(), seed)
}

pub fn generate_with(config: &GenConfig, seed: u64) -> String {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        config: config.clone(),
        scopes: Vec::new(),
        next_name: 0,
        next_emit: 0,
        helper: None,
        in_cond: false,
    };
    let mut out = String::new();
    if g.rng.gen_bool(config.helper_probability) {
        out.push_str("int twist(int x, int y) { if (x > y) { return x - y * 2; } return y + x % 5; }\n");
        g.helper = Some("twist");
    }
    out.push_str(&g.function("f"));
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ty {
    Int,
    Bool,
    IntArray,
}

#[derive(Clone, Debug)]
struct Var {
    name: String,
    ty: Ty,
    /// Loop counters and parameters the generator keeps read-only.
    writable: bool,
    /// Declared at the top of the function body.
    top: bool,
}

struct Gen {
    rng: ChaCha8Rng,
    config: GenConfig,
    scopes: Vec<Vec<Var>>,
    next_name: usize,
    next_emit: usize,
    helper: Option<&'static str>,
    /// Set while building a condition, where a nested ternary would mostly
    /// mask the outcome of its own test.
    in_cond: bool,
}

impl Gen {
    fn fresh(&mut self, prefix: &str) -> String {
        self.next_name += 1;
        format!("{prefix}{}", self.next_name)
    }

    fn emit_id(&mut self) -> usize {
        self.next_emit += 1;
        self.next_emit
    }

    fn declare(&mut self, name: &str, ty: Ty, writable: bool, top: bool) {
        self.scopes.last_mut().unwrap().push(Var {
            name: name.to_string(),
            ty,
            writable,
            top,
        });
    }

    fn visible(&self, ty: Ty) -> Vec<Var> {
        self.scopes.iter().flatten().filter(|v| v.ty == ty).cloned().collect()
    }

    fn pick_name(&mut self, ty: Ty, writable: bool) -> Option<String> {
        let pool: Vec<Var> = self.visible(ty).into_iter().filter(|v| v.writable || !writable).collect();
        pool.choose(&mut self.rng).map(|v| v.name.clone())
    }

    fn function(&mut self, name: &str) -> String {
        self.scopes.push(Vec::new());
        let mut params = vec!["int a".to_string()];
        self.declare("a", Ty::Int, false, true);
        for (ty, decl, n) in [
            (Ty::Int, "int b", "b"),
            (Ty::IntArray, "int[] xs", "xs"),
            (Ty::Bool, "bool flag", "flag"),
        ] {
            if self.rng.gen_bool(0.7) {
                params.push(decl.to_string());
                self.declare(n, ty, false, true);
            }
        }
        let mut body = Vec::new();
        for _ in 0..self.rng.gen_range(2..=4) {
            let v = self.fresh("v");
            let mut init = self.int_expr(1);
            if !self.mentions_var(&init) {
                let p = self.var_or_literal();
                init = format!("{p} + {init}");
            }
            if self.rng.gen_bool(0.4) {
                init = format!("ext({init})");
            }
            body.push(format!("int {v} = {init};"));
            self.declare(&v, Ty::Int, true, true);
        }
        if self.rng.gen_bool(0.4) {
            let v = self.fresh("ok");
            let init = self.cond(1);
            body.push(format!("bool {v} = {init};"));
            self.declare(&v, Ty::Bool, true, true);
        }
        let n = self.rng.gen_range(self.config.min_statements..=self.config.max_statements);
        for _ in 0..n {
            let s = self.stmt(0);
            body.push(s);
        }
        if self.visible(Ty::IntArray).iter().any(|v| v.name == "xs") {
            let k = self.fresh("k");
            let id = self.emit_id();
            body.push(format!("for (int {k} = 0; {k} < len(xs); {k}++) {{ emit({id}, xs[{k}]); }}"));
        }
        let terms: Vec<String> = self
            .visible(Ty::Int)
            .iter()
            .filter(|v| v.top)
            .enumerate()
            .map(|(k, v)| format!("{} * {}", v.name, 2 * k + 1))
            .chain(
                self.visible(Ty::Bool)
                    .iter()
                    .filter(|v| v.top && v.writable)
                    .map(|v| format!("({} ? 1 : 0)", v.name)),
            )
            .collect();
        body.push(format!("return {};", terms.join(" + ")));
        self.scopes.pop();
        let params = params.join(", ");
        format!("int {name}({params}) {{\n  {}\n}}\n", body.join("\n  "))
    }

    fn block(&mut self, depth: usize, count: usize, lead: Option<String>) -> String {
        self.scopes.push(Vec::new());
        let mut parts: Vec<String> = lead.into_iter().collect();
        for _ in 0..count {
            let s = self.stmt(depth);
            parts.push(s);
        }
        self.scopes.pop();
        format!("{{ {} }}", parts.join(" "))
    }

    fn stmt(&mut self, depth: usize) -> String {
        let nested = depth < self.config.max_depth;
        let mut menu: Vec<(u32, u8)> = vec![(3, 0), (2, 1), (2, 2), (2, 6), (1, 7), (1, 9), (1, 10)];
        if nested {
            menu.extend([(2, 3), (1, 4), (2, 5), (1, 8)]);
        }
        let total: u32 = menu.iter().map(|m| m.0).sum();
        let mut roll = self.rng.gen_range(0..total);
        let mut choice = 0;
        for (w, c) in menu {
            if roll < w {
                choice = c;
                break;
            }
            roll -= w;
        }
        match choice {
            0 => self.assign(),
            1 => self.compound(),
            2 => self.emit(),
            3 => self.for_loop(depth),
            4 => self.while_loop(depth),
            5 => self.if_else(depth),
            6 => self.ternary_shape(),
            7 => self.post_increment_shape(),
            8 => self.if_only(depth),
            9 => self.array_stmt(),
            _ => self.local(),
        }
    }

    fn assign(&mut self) -> String {
        let Some(v) = self.pick_name(Ty::Int, true) else {
            return self.emit();
        };
        let e = self.int_expr(2);
        if self.mentions(&e, &v) {
            format!("{v} = {v} * 3 + {e};")
        } else if self.rng.gen_bool(0.6) {
            format!("{v} = {v} + {e};")
        } else {
            format!("{v} = {e} - {v} * 2;")
        }
    }

    fn compound(&mut self) -> String {
        if self.rng.gen_bool(0.2) {
            if let Some(b) = self.pick_name(Ty::Bool, true) {
                return format!("{b} = !{b};");
            }
        }
        let Some(v) = self.pick_name(Ty::Int, true) else {
            return self.emit();
        };
        match self.rng.gen_range(0..5) {
            0 => format!("{v} += {};", self.int_expr(1)),
            1 => format!("{v} -= {};", self.int_expr(1)),
            2 => format!("{v} *= {};", self.rng.gen_range(2..5)),
            3 => format!("{v}++;"),
            _ => format!("--{v};"),
        }
    }

    fn emit(&mut self) -> String {
        let id = self.emit_id();
        let e = self.int_expr(1);
        format!("emit({id}, {e});")
    }

    fn for_loop(&mut self, depth: usize) -> String {
        let i = self.fresh("i");
        let bound = self.rng.gen_range(2..=4);
        let update = match self.rng.gen_range(0..4) {
            0 => format!("{i} += 1"),
            1 => format!("{i} = {i} + 1"),
            2 => format!("++{i}"),
            _ => format!("{i}++"),
        };
        self.scopes.push(Vec::new());
        self.declare(&i, Ty::Int, false, false);
        let has_lead = self.rng.gen_bool(0.5);
        let lead = if has_lead {
            let id = self.emit_id();
            Some(format!("if ({i} % 2 == 1) {{ emit({id}, {i}); continue; }}"))
        } else {
            None
        };
        let count = self.rng.gen_range(1..=3);
        let mut body = self.block(depth + 1, count, lead);
        // A break would often cut the loop short before any continue runs.
        if !has_lead && self.rng.gen_bool(0.4) {
            let c = self.cond(1);
            body.insert_str(body.len() - 1, &format!("if ({c}) break; "));
        }
        self.scopes.pop();
        format!("for (int {i} = 0; {i} < {bound}; {update}) {body}")
    }

    fn while_loop(&mut self, depth: usize) -> String {
        let w = self.fresh("w");
        let bound = self.rng.gen_range(2..=4);
        self.scopes.push(Vec::new());
        self.declare(&w, Ty::Int, false, false);
        let count = self.rng.gen_range(1..=2);
        let mut body = self.block(depth + 1, count, None);
        body.insert_str(body.len() - 1, &format!("{w}++; "));
        self.scopes.pop();
        // The counter lives in its own block so nothing can touch it after
        // the loop, where an update would go unobserved.
        format!("{{ int {w} = 0; while ({w} < {bound}) {body} }}")
    }

    fn if_else(&mut self, depth: usize) -> String {
        let c = self.cond(2);
        let lead_a = self.rng.gen_bool(0.7).then(|| format!("emit({}, 1);", self.emit_id()));
        let lead_b = self.rng.gen_bool(0.7).then(|| format!("emit({}, 2);", self.emit_id()));
        let n = self.rng.gen_range(1..=2);
        let then = self.block(depth + 1, n, lead_a);
        let n = self.rng.gen_range(1..=2);
        let other = self.block(depth + 1, n, lead_b);
        format!("if ({c}) {then} else {other}")
    }

    fn if_only(&mut self, depth: usize) -> String {
        let c = self.cond(2);
        let n = self.rng.gen_range(1..=2);
        let lead = Some(format!("emit({}, 3);", self.emit_id()));
        let then = self.block(depth + 1, n, lead);
        format!("if ({c}) {then}")
    }

    /// `if (C) { v = p; } else { v = q; }` with `p` and `q` different.
    fn ternary_shape(&mut self) -> String {
        let Some(v) = self.pick_name(Ty::Int, true) else {
            return self.emit();
        };
        let c = self.cond(1);
        let k = self.rng.gen_range(1..=9);
        let e = self.int_expr(1);
        let (p, q) = (format!("{v} + {k}"), format!("{e} - {v}"));
        let tail = if self.rng.gen_bool(0.5) {
            format!(" emit({}, {v});", self.emit_id())
        } else {
            String::new()
        };
        if self.rng.gen_bool(0.8) {
            format!("if ({c}) {{ {v} = {p}; }} else {{ {v} = {q}; }}{tail}")
        } else {
            format!("if ({c}) {v} = {p}; else {v} = {q};{tail}")
        }
    }

    /// `i = j; j += 1;` or `i = j; j = j + 1;`.
    fn post_increment_shape(&mut self) -> String {
        let pool: Vec<String> = self.visible(Ty::Int).into_iter().filter(|v| v.writable).map(|v| v.name).collect();
        if pool.len() < 2 || self.rng.gen_bool(0.5) {
            return self.assign();
        }
        let picked: Vec<&String> = pool.choose_multiple(&mut self.rng, 2).collect();
        let (i, j) = (picked[0].clone(), picked[1].clone());
        // The overwritten value is reported first so it stays observable.
        let id = self.emit_id();
        if self.rng.gen_bool(0.5) {
            format!("emit({id}, {i}); {i} = {j}; {j} += 1;")
        } else {
            format!("emit({id}, {i}); {i} = {j}; {j} = {j} + 1;")
        }
    }

    fn array_stmt(&mut self) -> String {
        if self.visible(Ty::IntArray).is_empty() {
            return self.emit();
        }
        let Some(v) = self.pick_name(Ty::Int, true) else {
            return self.emit();
        };
        match self.rng.gen_range(0..3) {
            0 => {
                let k = self.rng.gen_range(0..3);
                let e = self.int_expr(1);
                format!("if (len(xs) > {k}) {{ xs[{k}] = {e}; }}")
            }
            1 => format!("if (len(xs) > 0) {{ {v} = {v} + xs[len(xs) - 1]; }}"),
            _ => format!("{v} = {v} + len(xs);"),
        }
    }

    fn local(&mut self) -> String {
        let v = self.fresh("t");
        let e = self.int_expr(2);
        let top = self.scopes.len() == 1;
        self.declare(&v, Ty::Int, true, top);
        if top {
            format!("int {v} = {e};")
        } else {
            format!("int {v} = {e}; emit({}, {v});", self.emit_id())
        }
    }

    fn atom(&mut self) -> String {
        let vars = self.visible(Ty::Int);
        if !vars.is_empty() && self.rng.gen_bool(0.7) {
            vars.choose(&mut self.rng).unwrap().name.clone()
        } else {
            self.rng.gen_range(1..10).to_string()
        }
    }

    fn int_expr(&mut self, depth: usize) -> String {
        if depth == 0 || self.rng.gen_bool(0.35) {
            return self.atom();
        }
        match self.rng.gen_range(0..10) {
            0..=2 => format!("{} + {}", self.int_expr(depth - 1), self.atom()),
            3 | 4 => {
                let l = self.int_expr(depth - 1);
                let mut r = self.atom();
                if self.mentions(&l, &r) {
                    r = self.rng.gen_range(1..10).to_string();
                }
                format!("{l} - {r}")
            }
            5 => format!("{} * {}", self.atom(), self.rng.gen_range(2..4)),
            6 => format!("({}) % {}", self.int_expr(depth - 1), self.rng.gen_range(2..7)),
            7 => format!("ext({})", self.int_expr(depth - 1)),
            8 => match self.helper {
                Some(h) => format!("{h}({}, {})", self.atom(), self.atom()),
                None => format!("{} + 1", self.atom()),
            },
            _ if self.in_cond => format!("{} + {}", self.atom(), self.rng.gen_range(1..10)),
            _ => {
                let c = self.cond(0);
                let x = self.atom();
                let mut y = self.atom();
                if y == x {
                    y = format!("{x} + 5");
                }
                format!("(({c}) ? {x} : {y})")
            }
        }
    }

    fn cond(&mut self, depth: usize) -> String {
        let bools = self.visible(Ty::Bool);
        if !bools.is_empty() && self.rng.gen_bool(0.15) {
            let b = bools.choose(&mut self.rng).unwrap().name.clone();
            return if self.rng.gen_bool(0.5) { b } else { format!("!{b}") };
        }
        if depth > 0 && self.rng.gen_bool(0.1) {
            let op = if self.rng.gen_bool(0.5) { "&&" } else { "||" };
            return format!("{} {op} {}", self.cond(0), self.cond(0));
        }
        // Relational tests against a nearby literal keep both outcomes
        // likely under small random inputs; equality only appears on parity.
        let outer = std::mem::replace(&mut self.in_cond, true);
        let mut l = self.int_expr(1);
        self.in_cond = outer;
        if !self.mentions_var(&l) {
            l = self.var_or_literal();
        }
        if self.rng.gen_bool(0.2) {
            let op = if self.rng.gen_bool(0.5) { "==" } else { "!=" };
            if l.contains('*') {
                l = self.var_or_literal();
            }
            return format!("({l}) % 2 {op} 0");
        }
        let op = *["<", "<=", ">", ">="].choose(&mut self.rng).unwrap();
        let mut r = self.var_or_literal();
        if self.rng.gen_bool(0.5) || self.mentions(&l, &r) {
            r = self.rng.gen_range(-4..=4).to_string();
        }
        format!("{l} {op} {r}")
    }

    fn mentions(&self, e: &str, name: &str) -> bool {
        e.split(|c: char| !c.is_alphanumeric() && c != '_').any(|w| w == name)
    }

    /// Whether `e` reads a parameter or a local other than a loop counter.
    fn mentions_var(&self, e: &str) -> bool {
        self.scopes
            .iter()
            .flatten()
            .filter(|v| v.ty == Ty::Int && (v.top || v.writable))
            .any(|v| self.mentions(e, &v.name))
    }

    fn var_or_literal(&mut self) -> String {
        let vars: Vec<Var> = self.visible(Ty::Int).into_iter().filter(|v| v.top || v.writable).collect();
        match vars.choose(&mut self.rng) {
            Some(v) => v.name.clone(),
            None => self.rng.gen_range(0..10).to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataflow::build_def_use;
    use crate::interp::{run, ExternOracle, Status, Value, DEFAULT_FUEL};
    use crate::syntax::SourceUnit;

    #[test]
    fn programs_parse_resolve_and_terminate() {
        for seed in 0..200 {
            let text = generate_program(seed);
            let u = SourceUnit::parse("g", &text).unwrap_or_else(|e| panic!("{seed}: {e}\n{text}"));
            build_def_use(&u.ast).unwrap_or_else(|e| panic!("{seed}: {e}\n{text}"));
            let sig = crate::interp::signature(&u, "f").unwrap();
            let args: Vec<Value> = sig
                .iter()
                .map(|t| match t {
                    crate::syntax::Type::Int => Value::Int(3),
                    crate::syntax::Type::Bool => Value::Bool(true),
                    _ => Value::IntArray(vec![1, 2, 3]),
                })
                .collect();
            let out = run(&u, "f", &args, ExternOracle::new(seed), DEFAULT_FUEL);
            assert_ne!(out.status, Status::FuelExhausted, "{seed}\n{text}");
            assert!(
                !matches!(
                    out.status,
                    Status::RuntimeError(crate::interp::ErrorKind::TypeMismatch | crate::interp::ErrorKind::UnboundVariable, _)
                ),
                "{seed}: {}\n{text}",
                out.status
            );
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(generate_program(9), generate_program(9));
        assert_ne!(generate_program(9), generate_program(10));
    }
}
