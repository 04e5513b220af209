use std::collections::{BTreeSet, HashMap};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataflow::Chain;
use crate::syntax::{NodeId, NodeKind, SourceUnit, Tree};

use super::{aux, Analysis, RuleConfig, RuleId, TransformError, TransformOutcome};

/// `prefix` followed by one or more digits.
fn is_generated(name: &str, prefix: &str) -> bool {
    name.strip_prefix(prefix)
        .is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
}

fn function_nodes(an: &Analysis, f: NodeId) -> BTreeSet<NodeId> {
    an.unit.ast.preorder(f).into_iter().collect()
}

/// Chains declared in function `f` that may be renamed, in order of first
/// occurrence.
pub(crate) fn candidates<'a>(an: &'a Analysis, f: NodeId, config: &RuleConfig) -> Vec<&'a Chain> {
    let inside = function_nodes(an, f);
    let mut out: Vec<&Chain> = an
        .graph
        .chains
        .iter()
        .filter(|c| inside.contains(&c.decl) && !is_generated(&c.name, &config.var_prefix))
        .collect();
    out.sort_by_key(|c| first_position(an, c));
    out
}

fn first_position(an: &Analysis, c: &Chain) -> usize {
    c.occurrences
        .iter()
        .map(|&i| an.graph.occurrences[i].span.start)
        .min()
        .unwrap_or(usize::MAX)
}

pub(crate) fn sites(an: &Analysis, config: &RuleConfig) -> Vec<NodeId> {
    an.unit
        .ast
        .functions()
        .into_iter()
        .filter(|&f| !candidates(an, f, config).is_empty())
        .collect()
}

/// Renames `ceil(rename_fraction * n)` of the function's `n` candidate
/// variables, chosen uniformly, to `VAR_1`, `VAR_2`, ... in order of first
/// occurrence.
pub fn var_rename(
    unit: &SourceUnit,
    site: NodeId,
    config: &RuleConfig,
    seed: u64,
) -> Result<TransformOutcome, TransformError> {
    apply(&Analysis::new(unit)?, site, config, seed, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub(crate) fn apply(
    an: &Analysis,
    site: NodeId,
    config: &RuleConfig,
    seed: u64,
    rng: &mut ChaCha8Rng,
) -> Result<TransformOutcome, TransformError> {
    let chosen = choose(an, site, config, rng)?;
    rename(an, site, &chosen, &config.var_prefix, seed, false)
}

pub(crate) fn choose(
    an: &Analysis,
    site: NodeId,
    config: &RuleConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<NodeId>, TransformError> {
    if an.unit.ast.get(site).map(|n| n.kind) != Some(NodeKind::Function) {
        return Err(TransformError::NothingToRename(site));
    }
    let pool = candidates(an, site, config);
    if pool.is_empty() {
        return Err(TransformError::NothingToRename(site));
    }
    let count = ((config.rename_fraction * pool.len() as f64).ceil() as usize).clamp(1, pool.len());
    let mut picked = sample(rng, pool.len(), count).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| pool[i].decl).collect())
}

/// Renames the chains declared at `decls` (identifier nodes) inside the
/// function at `site`, skipping numbers whose name is already taken.
pub fn rename_chains(
    unit: &SourceUnit,
    site: NodeId,
    decls: &[NodeId],
    prefix: &str,
) -> Result<TransformOutcome, TransformError> {
    let an = Analysis::new(unit)?;
    rename(&an, site, decls, prefix, 0, false)
}

pub(crate) fn rename(
    an: &Analysis,
    site: NodeId,
    decls: &[NodeId],
    prefix: &str,
    seed: u64,
    drop_last_occurrence: bool,
) -> Result<TransformOutcome, TransformError> {
    let ast = &an.unit.ast;
    if ast.get(site).map(|n| n.kind) != Some(NodeKind::Function) {
        return Err(TransformError::NothingToRename(site));
    }
    let inside = function_nodes(an, site);
    let mut chains: Vec<&Chain> = decls
        .iter()
        .filter_map(|&d| an.graph.chain_of(d))
        .filter(|c| inside.contains(&c.decl))
        .collect();
    if chains.is_empty() {
        return Err(TransformError::NothingToRename(site));
    }
    chains.sort_by_key(|c| first_position(an, c));
    chains.dedup_by_key(|c| c.decl);

    let taken: BTreeSet<&str> = ast
        .nodes
        .iter()
        .filter(|n| matches!(n.kind, NodeKind::Identifier | NodeKind::Function | NodeKind::Call))
        .filter_map(|n| n.text())
        .collect();
    let mut next = 1usize;
    let mut new_names: HashMap<NodeId, String> = HashMap::new();
    let mut log = Vec::new();
    for chain in &chains {
        let name = loop {
            let candidate = format!("{prefix}{next}");
            next += 1;
            if !taken.contains(candidate.as_str()) {
                break candidate;
            }
        };
        let mut nodes: Vec<NodeId> = chain.occurrences.iter().map(|&i| an.graph.occurrences[i].node).collect();
        nodes.push(chain.decl);
        nodes.sort();
        nodes.dedup();
        if drop_last_occurrence && nodes.len() >= 2 {
            let last = chain
                .occurrences
                .iter()
                .map(|&i| &an.graph.occurrences[i])
                .max_by_key(|o| o.span.start)
                .map(|o| o.node);
            nodes.retain(|&n| Some(n) != last);
        }
        for n in nodes {
            new_names.insert(n, name.clone());
        }
        log.push(format!("{}:{name}", chain.name));
    }
    let mut tree = ast.tree();
    relabel(&mut tree, &new_names);
    an.finish(RuleId::VarRename, site, seed, &tree, aux([("renamed", log.join(","))]))
}

fn relabel(t: &mut Tree, names: &HashMap<NodeId, String>) {
    if let Some(name) = t.origin.and_then(|o| names.get(&o)) {
        t.text = Some(name.clone());
    }
    for c in &mut t.children {
        relabel(c, names);
    }
}
