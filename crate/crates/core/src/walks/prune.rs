use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::Walk;
use crate::graph::{Graph, TermId};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pruning {
    #[default]
    None,
    /// Root never revisited.
    Nrse,
    /// All nodes distinct.
    Ue,
    /// Root never revisited and no node strictly inside the walk shares a
    /// type with the root.
    Nrst,
    /// No two nodes share a type.
    Uet,
}

impl Pruning {
    pub const ALL: [Pruning; 5] = [Pruning::None, Pruning::Nrse, Pruning::Ue, Pruning::Nrst, Pruning::Uet];

    pub fn label(self) -> &'static str {
        match self {
            Pruning::None => "none",
            Pruning::Nrse => "nrse",
            Pruning::Ue => "ue",
            Pruning::Nrst => "nrst",
            Pruning::Uet => "uet",
        }
    }
}

impl std::str::FromStr for Pruning {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pruning::ALL
            .into_iter()
            .find(|p| p.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown pruning scheme {s:?} (none, nrse, ue, nrst, uet)"))
    }
}

/// Whether `walk` survives `scheme`. The walk's own length is its depth `d`.
///
/// NRST allows a node of the root's type at exactly depth `d`, but never the
/// root itself anywhere, so that it stays at least as strict as NRSE.
pub fn prune_check(walk: &Walk, scheme: Pruning, g: &Graph) -> bool {
    let nodes: Vec<TermId> = walk.nodes().collect();
    let Some((&root, rest)) = nodes.split_first() else {
        return true;
    };
    match scheme {
        Pruning::None => true,
        Pruning::Nrse => !rest.contains(&root),
        Pruning::Ue => {
            let mut seen = HashSet::with_capacity(nodes.len());
            nodes.iter().all(|v| seen.insert(*v))
        }
        Pruning::Nrst => {
            if rest.contains(&root) {
                return false;
            }
            let root_types: Vec<TermId> = g.types_of(root).collect();
            let interior = &rest[..rest.len().saturating_sub(1)];
            !interior.iter().any(|&v| g.types_of(v).any(|t| root_types.contains(&t)))
        }
        Pruning::Uet => {
            let mut seen: HashSet<TermId> = HashSet::new();
            for &v in &nodes {
                let types: Vec<TermId> = g.types_of(v).collect();
                if types.iter().any(|t| seen.contains(t)) {
                    return false;
                }
                seen.extend(types);
            }
            true
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    fn walk(g: &Graph, names: &[&str]) -> Walk {
        Walk { tokens: names.iter().map(|n| g.lookup(n).unwrap()).collect() }
    }

    fn graph() -> Graph {
        let mut b = GraphBuilder::new();
        b.add_iris("a", "p", "b").add_iris("b", "q", "a").add_iris("b", "q", "b");
        b.add_iris("film1", "director", "person").add_iris("person", "directed", "film2");
        b.add_type("film1", "Film").add_type("film2", "Film").add_type("person", "Person");
        b.build()
    }

    #[test]
    fn nrse_rejects_returning_root() {
        let g = graph();
        let w = walk(&g, &["a", "p", "b", "q", "a"]);
        assert!(!prune_check(&w, Pruning::Nrse, &g));
        assert!(prune_check(&w, Pruning::None, &g));
    }

    #[test]
    fn ue_vs_nrse() {
        let g = graph();
        let w = walk(&g, &["a", "p", "b", "q", "b"]);
        assert!(!prune_check(&w, Pruning::Ue, &g));
        assert!(prune_check(&w, Pruning::Nrse, &g));
    }

    #[test]
    fn same_type_at_final_depth() {
        let g = graph();
        let w = walk(&g, &["film1", "director", "person", "directed", "film2"]);
        assert!(prune_check(&w, Pruning::Nrst, &g));
        assert!(!prune_check(&w, Pruning::Uet, &g));
        assert!(prune_check(&w, Pruning::Ue, &g));
        assert!(prune_check(&w, Pruning::Nrse, &g));
    }

    #[test]
    fn parses_labels() {
        assert_eq!("UET".parse::<Pruning>().unwrap(), Pruning::Uet);
        assert!("bogus".parse::<Pruning>().is_err());
    }
}
