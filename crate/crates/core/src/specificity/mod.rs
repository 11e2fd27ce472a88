//! Specificity of predicate-path templates to an entity type.
//!
//! For a type `t` with instances `S` and a template `P = (p1, …, pd)`, let
//! `V` be the set of nodes reachable from `S` along `P`. Specificity is the
//! mean over `k ∈ V` of the fraction of all length-`d` paths ending in `k`
//! that start in `S`. Paths may use any predicate sequence.
//!
//! Two routes compute it:
//!
//! - [`exact_specificity`] (`eq2`) evaluates the definition by path counting.
//! - [`estimate_specificity`] (`alg2`) runs bidirectional random walks: a
//!   forward walk from a random seed along `P` followed by a uniform reverse
//!   walk of the same length, scoring a hit when the reverse walk lands on an
//!   instance of `t`.
//!
//! The two agree when the incoming-path composition is homogeneous across
//! `V`. In general they differ: the walk estimator weights each `k` by how
//! often forward walks reach it and weights each reverse path by the product
//! of inverse in-degrees along it, while the exact form averages uniformly
//! over distinct nodes and counts paths. Table metadata records which method
//! produced the scores.

mod estimate;
mod exact;
mod relevance;
mod select;
mod table;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::{Edge, Graph, TermId};

pub use estimate::{estimate_specificity, EstimateOptions};
pub use exact::{exact_specificity, exact_specificity_for_seeds, node_to_node_specificity, reachable_via};
pub use relevance::{relevance_report, RelevanceRow};
pub use select::{path_frequencies, select_paths, SelectOptions};
pub use table::{
    rank_by_specificity, read_table_tsv, sort_entries, write_table_tsv, EstimatorParams, Method,
    SpecificityTable, TableMeta,
};

/// A template of successive predicates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Relationship(pub Vec<TermId>);

impl Relationship {
    pub fn new(predicates: Vec<TermId>) -> Self {
        assert!(!predicates.is_empty(), "relationship needs at least one predicate");
        Relationship(predicates)
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn predicates(&self) -> &[TermId] {
        &self.0
    }

    pub fn extended(&self, p: TermId) -> Self {
        let mut v = self.0.clone();
        v.push(p);
        Relationship(v)
    }

    pub fn is_prefix_of(&self, other: &[TermId]) -> bool {
        other.len() >= self.0.len() && other[..self.0.len()] == self.0[..]
    }

    /// Predicate IRIs joined by `|`.
    pub fn render(&self, g: &Graph) -> String {
        self.0.iter().map(|&p| g.term(p)).collect::<Vec<_>>().join("|")
    }

    pub fn parse(g: &Graph, text: &str) -> crate::Result<Self> {
        let preds = text
            .split('|')
            .map(|iri| g.require(iri))
            .collect::<crate::Result<Vec<_>>>()?;
        if preds.is_empty() {
            return Err(crate::Error::InvalidParam("empty relationship".into()));
        }
        Ok(Relationship(preds))
    }
}

impl fmt::Display for Relationship {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|p| p.0.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecificityEntry {
    pub relationship: Relationship,
    /// In `[0, 1]`.
    pub score: f64,
    /// Walks performed for estimates; incoming length-d paths counted over
    /// the reachable set for exact scores.
    pub support: u64,
}

/// Which edges the path-counting and reverse-walk sides may traverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgePolicy {
    /// Whether `rdf:type` edges are ordinary edges for reverse paths.
    pub include_type_edges: bool,
}

impl Default for EdgePolicy {
    fn default() -> Self {
        EdgePolicy { include_type_edges: true }
    }
}

impl EdgePolicy {
    #[inline]
    pub(crate) fn allows(&self, g: &Graph, e: &Edge) -> bool {
        self.include_type_edges || Some(e.predicate) != g.type_predicate()
    }
}
