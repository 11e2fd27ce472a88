//! Exact specificity by path counting.
//!
//! Path counts grow exponentially with depth, so they are carried as `f64`;
//! only their ratios matter.

use std::collections::{BTreeSet, HashMap};

use super::{EdgePolicy, Relationship, SpecificityEntry};
use crate::error::{Error, Result};
use crate::graph::{Graph, TermId};

/// Fraction of length-`d` paths ending in `n1` that start at `n2`.
/// Zero when no length-`d` path reaches `n1`.
pub fn node_to_node_specificity(
    g: &Graph,
    n1: TermId,
    n2: TermId,
    d: usize,
    policy: EdgePolicy,
) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidParam("depth must be at least 1".into()));
    }
    g.out_neighbors(n1)?;
    g.out_neighbors(n2)?;
    // counts[x] = number of length-k paths from x to n1
    let mut counts: HashMap<TermId, f64> = HashMap::from([(n1, 1.0)]);
    for _ in 0..d {
        let mut next: HashMap<TermId, f64> = HashMap::new();
        for (&v, &c) in &counts {
            for e in g.in_slice(v) {
                if policy.allows(g, e) {
                    *next.entry(e.node).or_default() += c;
                }
            }
        }
        counts = next;
    }
    let total: f64 = counts.values().sum();
    if total == 0.0 {
        return Ok(0.0);
    }
    Ok(counts.get(&n2).copied().unwrap_or(0.0) / total)
}

/// Nodes reachable from `sources` by following exactly the predicates of
/// `rel`.
pub fn reachable_via(g: &Graph, sources: &[TermId], rel: &Relationship) -> BTreeSet<TermId> {
    let mut frontier: BTreeSet<TermId> = sources.iter().copied().collect();
    for &p in rel.predicates() {
        frontier = frontier
            .iter()
            .flat_map(|&v| g.out_with(v, p).iter().map(|e| e.node))
            .collect();
        if frontier.is_empty() {
            break;
        }
    }
    frontier
}

/// Exact specificity of `rel` to type `t`, with `S` all direct instances.
pub fn exact_specificity(
    g: &Graph,
    rel: &Relationship,
    t: TermId,
    policy: EdgePolicy,
) -> Result<SpecificityEntry> {
    let seeds = g.entities_of_type(t);
    if seeds.is_empty() {
        let name = if g.contains(t) { g.term(t).to_string() } else { t.to_string() };
        return Err(Error::EmptyType(name));
    }
    Ok(exact_specificity_for_seeds(g, rel, &seeds, policy))
}

/// Exact specificity with an explicit source set.
pub fn exact_specificity_for_seeds(
    g: &Graph,
    rel: &Relationship,
    seeds: &[TermId],
    policy: EdgePolicy,
) -> SpecificityEntry {
    let reachable = reachable_via(g, seeds, rel);
    if reachable.is_empty() {
        return SpecificityEntry { relationship: rel.clone(), score: 0.0, support: 0 };
    }
    let d = rel.depth();
    let n = g.num_terms();

    // Forward path counts: from_seeds[k] counts length-d paths S ⇝ k,
    // from_any[k] counts length-d paths from any node to k.
    let mut from_seeds = vec![0.0f64; n];
    for &s in seeds {
        from_seeds[s.index()] = 1.0;
    }
    let mut from_any = vec![1.0f64; n];
    for _ in 0..d {
        from_seeds = step_forward(g, &from_seeds, policy);
        from_any = step_forward(g, &from_any, policy);
    }

    let mut sum = 0.0;
    let mut support = 0.0;
    for k in &reachable {
        let all = from_any[k.index()];
        debug_assert!(all > 0.0 && from_seeds[k.index()] <= all);
        sum += from_seeds[k.index()] / all;
        support += all;
    }
    SpecificityEntry {
        relationship: rel.clone(),
        score: (sum / reachable.len() as f64).clamp(0.0, 1.0),
        support: support.min(u64::MAX as f64) as u64,
    }
}

fn step_forward(g: &Graph, counts: &[f64], policy: EdgePolicy) -> Vec<f64> {
    let mut next = vec![0.0f64; counts.len()];
    for (v, &c) in counts.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        for e in g.out_slice(TermId(v as u32)) {
            if policy.allows(g, e) {
                next[e.node.index()] += c;
            }
        }
    }
    next
}
