//! Side-by-side relevance metrics for a set of templates: specificity,
//! frequency and the PageRank of the nodes the template reaches.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{reachable_via, Relationship, SpecificityEntry};
use crate::error::{Error, Result};
use crate::graph::{Graph, TermId};
use crate::pagerank::ScoreMap;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelevanceRow {
    pub relationship: Relationship,
    pub specificity: f64,
    /// Mean score of the `top_n` highest-ranked nodes reachable from the
    /// type's instances via the template.
    pub pagerank: Option<f64>,
    /// Concrete paths from instances of the type realizing the template.
    pub frequency: u64,
}

pub fn relevance_report(
    g: &Graph,
    t: TermId,
    entries: &[SpecificityEntry],
    pagerank: Option<&ScoreMap>,
    top_n: usize,
) -> Result<Vec<RelevanceRow>> {
    let instances = g.entities_of_type(t);
    if instances.is_empty() {
        return Err(Error::EmptyType(g.term(t).to_string()));
    }
    Ok(entries
        .iter()
        .map(|e| {
            let pagerank = pagerank.map(|scores| {
                let mut reached: Vec<f64> = reachable_via(g, &instances, &e.relationship)
                    .into_iter()
                    .filter_map(|v| scores.get(v))
                    .collect();
                reached.sort_by(|a, b| b.total_cmp(a));
                reached.truncate(top_n);
                if reached.is_empty() {
                    0.0
                } else {
                    reached.iter().sum::<f64>() / reached.len() as f64
                }
            });
            RelevanceRow {
                relationship: e.relationship.clone(),
                specificity: e.score,
                pagerank,
                frequency: template_frequency(g, &instances, &e.relationship),
            }
        })
        .collect())
}

fn template_frequency(g: &Graph, sources: &[TermId], rel: &Relationship) -> u64 {
    let mut counts: HashMap<TermId, u64> = sources.iter().map(|&s| (s, 1)).collect();
    for &p in rel.predicates() {
        let mut next: HashMap<TermId, u64> = HashMap::new();
        for (&v, &c) in &counts {
            for e in g.out_with(v, p) {
                *next.entry(e.node).or_default() += c;
            }
        }
        counts = next;
    }
    counts.values().sum()
}
