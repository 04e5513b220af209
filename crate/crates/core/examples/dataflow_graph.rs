// Prints the def-use chains and edges of a small function, and which
// expressions are pure enough to reorder.

use denat::dataflow::{build_def_use, free_vars, is_pure, may_fail};
use denat::syntax::{print_tree, NodeKind, SourceUnit};

const SRC: &str = "
int total(int[] xs, int n) {
    int s = 0;
    for (int i = 0; i < n; i++) {
        if (xs[i] > 0) { s += xs[i]; }
    }
    log(s);
    return s / n;
}";

pub fn run() -> Result<usize, Box<dyn std::error::Error>> {
    let unit = SourceUnit::parse("total.mini", SRC)?;
    let graph = build_def_use(&unit.ast)?;
    for chain in &graph.chains {
        let roles: Vec<String> = graph
            .chain_occurrences(chain)
            .iter()
            .map(|o| format!("{:?}@{}", o.role, o.span.start))
            .collect();
        println!("{} : {}  [{}]", chain.name, chain.ty, roles.join(" "));
    }
    for e in &graph.edges {
        let (a, b) = (&graph.occurrences[e.from], &graph.occurrences[e.to]);
        println!("  {} {:?}@{} -> {:?}@{}", a.name, a.role, a.span.start, b.role, b.span.start);
    }
    let ast = &unit.ast;
    for n in ast.preorder(ast.root) {
        if matches!(ast.kind(n), NodeKind::Binary | NodeKind::Call) {
            let vars: Vec<String> = free_vars(ast, n).into_iter().collect();
            println!(
                "{:<22} pure {:<5} may fail {:<5} reads {vars:?}",
                print_tree(&ast.to_tree(n)),
                is_pure(ast, n),
                may_fail(ast, n)
            );
        }
    }
    Ok(graph.edges.len())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
