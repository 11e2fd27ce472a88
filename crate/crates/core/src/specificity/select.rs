//! Candidate templates ranked by how often they occur from the seed set.

use std::collections::HashMap;

use rand::Rng as _;

use super::{Relationship, SpecificityEntry};
use crate::error::{Error, Result};
use crate::graph::{Graph, TermId};
use crate::rng::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SelectOptions {
    /// Keep `rdf:type` out of candidate templates.
    pub exclude_type_predicate: bool,
    /// Upper bound on `(prefix, node)` states kept during exact counting;
    /// past it, from-scratch selection falls back to sampling.
    pub exact_state_budget: usize,
    /// Number of random walks used by the sampling fallback.
    pub sample_walks: usize,
}

impl Default for SelectOptions {
    fn default() -> Self {
        SelectOptions { exclude_type_predicate: true, exact_state_budget: 2_000_000, sample_walks: 50_000 }
    }
}

/// Chooses the `n_paths` most frequent depth-`depth` templates.
///
/// Without `prev` (or at depth 1) templates are counted from scratch over
/// outgoing paths of the seeds. With `prev`, only one-predicate extensions
/// of entries scoring at least `threshold` are considered. Ties are broken by
/// predicate-id order.
#[allow(clippy::too_many_arguments)]
pub fn select_paths(
    g: &Graph,
    seeds: &[TermId],
    depth: usize,
    n_paths: usize,
    prev: Option<&[SpecificityEntry]>,
    threshold: f64,
    opts: SelectOptions,
    rng: &mut Rng,
) -> Result<Vec<Relationship>> {
    let mut freq = path_frequencies(g, seeds, depth, prev, threshold, opts, rng)?;
    freq.truncate(n_paths);
    Ok(freq.into_iter().map(|(r, _)| r).collect())
}

/// Every candidate template with its frequency, most frequent first.
///
/// Frequency is the number of concrete paths from the seeds realizing the
/// template, or the number of sampled walks that did when the exact count
/// would exceed the state budget.
pub fn path_frequencies(
    g: &Graph,
    seeds: &[TermId],
    depth: usize,
    prev: Option<&[SpecificityEntry]>,
    threshold: f64,
    opts: SelectOptions,
    rng: &mut Rng,
) -> Result<Vec<(Relationship, u64)>> {
    if seeds.is_empty() {
        return Err(Error::InvalidParam("seed set is empty".into()));
    }
    if depth == 0 {
        return Err(Error::InvalidParam("depth must be at least 1".into()));
    }
    let excluded = if opts.exclude_type_predicate { g.type_predicate() } else { None };
    let counts = match prev {
        Some(prev) if depth >= 2 => {
            let prefixes: Vec<&Relationship> = prev
                .iter()
                .filter(|e| e.score >= threshold && e.relationship.depth() == depth - 1)
                .map(|e| &e.relationship)
                .collect();
            extension_counts(g, seeds, &prefixes, excluded)
        }
        _ => match scratch_counts(g, seeds, depth, excluded, opts.exact_state_budget) {
            Some(c) => c,
            None => {
                log::info!("template enumeration over budget at depth {depth}; sampling");
                sampled_counts(g, seeds, depth, excluded, opts.sample_walks, rng)
            }
        },
    };
    let mut ranked: Vec<(Relationship, u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(ranked)
}

fn scratch_counts(
    g: &Graph,
    seeds: &[TermId],
    depth: usize,
    excluded: Option<TermId>,
    budget: usize,
) -> Option<HashMap<Relationship, u64>> {
    let mut states: HashMap<Vec<TermId>, HashMap<TermId, u64>> = HashMap::new();
    let start = states.entry(Vec::new()).or_default();
    for &s in seeds {
        *start.entry(s).or_default() += 1;
    }
    for level in 0..depth {
        let last = level + 1 == depth;
        let mut next: HashMap<Vec<TermId>, HashMap<TermId, u64>> = HashMap::new();
        let mut n_states = 0usize;
        for (prefix, nodes) in &states {
            for (&v, &c) in nodes {
                for e in g.out_slice(v) {
                    if Some(e.predicate) == excluded {
                        continue;
                    }
                    let mut key = prefix.clone();
                    key.push(e.predicate);
                    let slot = next.entry(key).or_default();
                    // Only the totals matter on the last level.
                    let node = if last { TermId(0) } else { e.node };
                    let cell = slot.entry(node).or_insert_with(|| {
                        n_states += 1;
                        0
                    });
                    *cell += c;
                }
            }
        }
        if n_states > budget {
            return None;
        }
        states = next;
    }
    Some(
        states
            .into_iter()
            .map(|(k, nodes)| (Relationship(k), nodes.values().sum()))
            .collect(),
    )
}

fn extension_counts(
    g: &Graph,
    seeds: &[TermId],
    prefixes: &[&Relationship],
    excluded: Option<TermId>,
) -> HashMap<Relationship, u64> {
    let mut out: HashMap<Relationship, u64> = HashMap::new();
    for prefix in prefixes {
        let mut nodes: HashMap<TermId, u64> = HashMap::new();
        for &s in seeds {
            *nodes.entry(s).or_default() += 1;
        }
        for &p in prefix.predicates() {
            let mut next: HashMap<TermId, u64> = HashMap::new();
            for (&v, &c) in &nodes {
                for e in g.out_with(v, p) {
                    *next.entry(e.node).or_default() += c;
                }
            }
            nodes = next;
        }
        for (&v, &c) in &nodes {
            for e in g.out_slice(v) {
                if Some(e.predicate) == excluded {
                    continue;
                }
                *out.entry(prefix.extended(e.predicate)).or_default() += c;
            }
        }
    }
    out
}

fn sampled_counts(
    g: &Graph,
    seeds: &[TermId],
    depth: usize,
    excluded: Option<TermId>,
    walks: usize,
    rng: &mut Rng,
) -> HashMap<Relationship, u64> {
    let mut out: HashMap<Relationship, u64> = HashMap::new();
    'walk: for _ in 0..walks {
        let mut v = seeds[rng.gen_range(0..seeds.len())];
        let mut preds = Vec::with_capacity(depth);
        for _ in 0..depth {
            let edges: Vec<_> = g.out_slice(v).iter().filter(|e| Some(e.predicate) != excluded).collect();
            if edges.is_empty() {
                continue 'walk;
            }
            let e = edges[rng.gen_range(0..edges.len())];
            preds.push(e.predicate);
            v = e.node;
        }
        *out.entry(Relationship(preds)).or_default() += 1;
    }
    out
}
