//! Bidirectional random-walk estimator.

use rand::{Rng as _, RngCore};
use rayon::prelude::*;

use super::{EdgePolicy, Relationship, SpecificityEntry};
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, TermId};
use crate::rng::{key_of, stream, Rng};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateOptions {
    /// Extra seed draws allowed when a forward walk dead-ends. A trial that
    /// still cannot complete counts as a miss.
    pub forward_retry_limit: usize,
    pub policy: EdgePolicy,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions { forward_retry_limit: 10, policy: EdgePolicy::default() }
    }
}

/// Estimates the specificity of each candidate with `n_walks` bidirectional
/// walks. Entries come back in candidate order with `support == n_walks`.
///
/// Each candidate draws from its own stream, keyed by its predicate
/// sequence and a base seed taken from `rng`, so the result does not depend
/// on candidate order or on how many threads evaluate them.
#[allow(clippy::too_many_arguments)]
pub fn estimate_specificity(
    g: &Graph,
    candidates: &[Relationship],
    seeds: &[TermId],
    t: TermId,
    depth: usize,
    n_walks: usize,
    opts: EstimateOptions,
    rng: &mut Rng,
) -> Result<Vec<SpecificityEntry>> {
    if seeds.is_empty() {
        return Err(Error::InvalidParam("seed set is empty".into()));
    }
    if let Some(bad) = candidates.iter().find(|c| c.depth() != depth) {
        return Err(Error::InvalidParam(format!(
            "candidate {bad} has depth {}, expected {depth}",
            bad.depth()
        )));
    }
    if n_walks <= seeds.len() {
        log::warn!("n_walks ({n_walks}) should exceed the seed-set size ({})", seeds.len());
    }
    let base = rng.next_u64();
    Ok(candidates
        .par_iter()
        .map(|rel| {
            let mut local = stream(base, key_of(rel.predicates().iter().map(|p| u64::from(p.0))));
            let hits = count_hits(g, rel, seeds, t, n_walks, opts, &mut local);
            SpecificityEntry {
                relationship: rel.clone(),
                score: if n_walks == 0 { 0.0 } else { hits as f64 / n_walks as f64 },
                support: n_walks as u64,
            }
        })
        .collect())
}

fn count_hits(
    g: &Graph,
    rel: &Relationship,
    seeds: &[TermId],
    t: TermId,
    n_walks: usize,
    opts: EstimateOptions,
    rng: &mut Rng,
) -> usize {
    let mut hits = 0;
    for _ in 0..n_walks {
        let mut reached = None;
        for _ in 0..=opts.forward_retry_limit {
            let s = seeds[rng.gen_range(0..seeds.len())];
            if let Some(v) = forward_walk(g, s, rel, rng) {
                reached = Some(v);
                break;
            }
        }
        let Some(v) = reached else { continue };
        if let Some(end) = reverse_walk(g, v, rel.depth(), opts.policy, rng) {
            if g.has_type(end, t) {
                hits += 1;
            }
        }
    }
    hits
}

/// Follows the template from `start`, choosing uniformly among matching
/// edges. `None` on a dead end.
pub(crate) fn forward_walk(g: &Graph, start: TermId, rel: &Relationship, rng: &mut Rng) -> Option<TermId> {
    let mut v = start;
    for &p in rel.predicates() {
        let run = g.out_with(v, p);
        if run.is_empty() {
            return None;
        }
        v = run[rng.gen_range(0..run.len())].node;
    }
    Some(v)
}

/// `depth` steps backwards along uniformly chosen incoming edges.
pub(crate) fn reverse_walk(
    g: &Graph,
    start: TermId,
    depth: usize,
    policy: EdgePolicy,
    rng: &mut Rng,
) -> Option<TermId> {
    let mut v = start;
    for _ in 0..depth {
        v = pick_allowed(g, g.in_slice(v), policy, rng)?.node;
    }
    Some(v)
}

/// Uniform choice over the edges the policy admits. Type edges, when
/// excluded, form one contiguous run in the predicate-sorted slice.
fn pick_allowed<'g>(g: &Graph, edges: &'g [Edge], policy: EdgePolicy, rng: &mut Rng) -> Option<&'g Edge> {
    match g.type_predicate() {
        Some(tp) if !policy.include_type_edges => {
            let lo = edges.partition_point(|e| e.predicate < tp);
            let hi = lo + edges[lo..].partition_point(|e| e.predicate == tp);
            let allowed = edges.len() - (hi - lo);
            if allowed == 0 {
                return None;
            }
            let i = rng.gen_range(0..allowed);
            Some(if i < lo { &edges[i] } else { &edges[i + (hi - lo)] })
        }
        _ => {
            if edges.is_empty() {
                None
            } else {
                Some(&edges[rng.gen_range(0..edges.len())])
            }
        }
    }
}
