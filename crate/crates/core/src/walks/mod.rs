//! Per-entity walk extraction.
//!
//! A walk alternates node and predicate tokens, `v0 e1 v1 … ed vd`. Each of
//! the `walks_per_entity` attempts produces at most one walk; attempts that
//! dead-end under a template or fail the pruning check are dropped, not
//! retried.

mod corpus;
mod prune;

use std::time::Instant;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, TermId};
use crate::pagerank::ScoreMap;
use crate::rng::{stream, Rng};
use crate::specificity::{Relationship, SpecificityTable};

pub use corpus::{corpus_stats, read_corpus, write_corpus, write_stats_csv, CorpusStats, EntityStats, WalkCorpus};
pub use prune::{prune_check, Pruning};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bias {
    #[default]
    Uniform,
    /// Edge weight ∝ global frequency of its predicate.
    Frequency,
    /// Edge weight ∝ score of the target node; unscored targets get 0.
    PageRank,
    /// Follow a template drawn from the above-threshold entries of a
    /// specificity table, ∝ score.
    Specificity,
}

impl Bias {
    pub const ALL: [Bias; 4] = [Bias::Uniform, Bias::Frequency, Bias::PageRank, Bias::Specificity];

    pub fn label(self) -> &'static str {
        match self {
            Bias::Uniform => "uniform",
            Bias::Frequency => "frequency",
            Bias::PageRank => "pagerank",
            Bias::Specificity => "specificity",
        }
    }
}

impl std::str::FromStr for Bias {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Bias::ALL
            .into_iter()
            .find(|b| b.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown bias {s:?} (uniform, frequency, pagerank, specificity)"))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct WalkStrategy<'a> {
    pub bias: Bias,
    pub pruning: Pruning,
    pub depth: usize,
    /// Attempt budget per entity.
    pub walks_per_entity: usize,
    pub specificity_table: Option<&'a SpecificityTable>,
    pub pagerank_scores: Option<&'a ScoreMap>,
}

impl<'a> WalkStrategy<'a> {
    pub fn new(bias: Bias, depth: usize, walks_per_entity: usize) -> Self {
        WalkStrategy {
            bias,
            pruning: Pruning::None,
            depth,
            walks_per_entity,
            specificity_table: None,
            pagerank_scores: None,
        }
    }

    pub fn with_pruning(mut self, pruning: Pruning) -> Self {
        self.pruning = pruning;
        self
    }

    pub fn with_table(mut self, table: &'a SpecificityTable) -> Self {
        self.specificity_table = Some(table);
        self
    }

    pub fn with_pagerank(mut self, scores: &'a ScoreMap) -> Self {
        self.pagerank_scores = Some(scores);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 {
            return Err(Error::InvalidParam("walk depth must be at least 1".into()));
        }
        match self.bias {
            Bias::Specificity if self.specificity_table.is_none() => {
                Err(Error::InvalidParam("specificity bias requires a specificity table".into()))
            }
            Bias::PageRank if self.pagerank_scores.is_none() => {
                Err(Error::InvalidParam("pagerank bias requires PageRank scores".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Walk {
    pub tokens: Vec<TermId>,
}

impl Walk {
    pub fn depth(&self) -> usize {
        self.tokens.len() / 2
    }

    pub fn root(&self) -> TermId {
        self.tokens[0]
    }

    pub fn nodes(&self) -> impl Iterator<Item = TermId> + '_ {
        self.tokens.iter().step_by(2).copied()
    }

    pub fn predicates(&self) -> impl Iterator<Item = TermId> + '_ {
        self.tokens.iter().skip(1).step_by(2).copied()
    }

    /// Every consecutive `(v, e, v')` is a triple of `g`.
    pub fn is_valid_in(&self, g: &Graph) -> bool {
        self.tokens.len() % 2 == 1
            && self
                .tokens
                .windows(3)
                .step_by(2)
                .all(|w| g.contains_triple(w[0], w[1], w[2]))
    }
}

/// A strategy resolved against a graph, with per-step weights precomputed.
pub struct Walker<'g> {
    g: &'g Graph,
    bias: Bias,
    pruning: Pruning,
    depth: usize,
    attempts: usize,
    node_weight: Vec<f64>,
    templates: Vec<Relationship>,
    template_cdf: Vec<f64>,
}

impl<'g> Walker<'g> {
    pub fn new(g: &'g Graph, strategy: &WalkStrategy<'_>) -> Result<Self> {
        strategy.validate()?;
        let node_weight = match (strategy.bias, strategy.pagerank_scores) {
            (Bias::PageRank, Some(scores)) => {
                let mut w = scores.dense(g.num_terms());
                for (i, x) in w.iter_mut().enumerate() {
                    if g.is_literal(TermId(i as u32)) || !x.is_finite() || *x < 0.0 {
                        *x = 0.0;
                    }
                }
                w
            }
            _ => Vec::new(),
        };
        let mut templates = Vec::new();
        let mut template_cdf = Vec::new();
        if let (Bias::Specificity, Some(table)) = (strategy.bias, strategy.specificity_table) {
            let mut acc = 0.0;
            for e in table.above_threshold(strategy.depth) {
                if e.score > 0.0 {
                    acc += e.score;
                    templates.push(e.relationship.clone());
                    template_cdf.push(acc);
                }
            }
            if templates.is_empty() {
                log::warn!("no above-threshold templates at depth {}", strategy.depth);
            }
        }
        Ok(Walker {
            g,
            bias: strategy.bias,
            pruning: strategy.pruning,
            depth: strategy.depth,
            attempts: strategy.walks_per_entity,
            node_weight,
            templates,
            template_cdf,
        })
    }

    pub fn templates(&self) -> &[Relationship] {
        &self.templates
    }

    /// Runs the attempt budget from `entity`.
    pub fn extract(&self, entity: TermId, rng: &mut Rng) -> Result<WalkCorpus> {
        self.g.out_neighbors(entity)?;
        let start = Instant::now();
        let mut walks = Vec::new();
        let mut stats = EntityStats { entity, depth: self.depth, attempts: self.attempts, ..Default::default() };
        if self.g.out_degree(entity) > 0 {
            for _ in 0..self.attempts {
                match self.attempt(entity, rng) {
                    None => stats.dead_ends += 1,
                    Some(w) if !prune_check(&w, self.pruning, self.g) => stats.pruned += 1,
                    Some(w) => walks.push(w),
                }
            }
        } else {
            stats.dead_ends = self.attempts;
        }
        stats.walks = walks.len();
        stats.distinct = corpus::count_distinct(&walks);
        stats.millis = start.elapsed().as_secs_f64() * 1e3;
        Ok(WalkCorpus { walks, entities: vec![stats] })
    }

    fn attempt(&self, root: TermId, rng: &mut Rng) -> Option<Walk> {
        let mut tokens = Vec::with_capacity(2 * self.depth + 1);
        tokens.push(root);
        let mut v = root;
        if self.bias == Bias::Specificity {
            let template = self.draw_template(rng)?;
            for &p in template.predicates() {
                let run = self.g.out_with(v, p);
                if run.is_empty() {
                    return None;
                }
                v = run[rng.gen_range(0..run.len())].node;
                tokens.push(p);
                tokens.push(v);
            }
            return Some(Walk { tokens });
        }
        for _ in 0..self.depth {
            let Some(e) = self.step(v, rng) else { break };
            tokens.push(e.predicate);
            tokens.push(e.node);
            v = e.node;
        }
        // Walks shorter than requested are kept at their natural length; a
        // root with nowhere to go yields nothing.
        (tokens.len() > 1).then_some(Walk { tokens })
    }

    fn draw_template(&self, rng: &mut Rng) -> Option<&Relationship> {
        let total = *self.template_cdf.last()?;
        let x = rng.gen::<f64>() * total;
        let i = self.template_cdf.partition_point(|&c| c <= x).min(self.templates.len() - 1);
        Some(&self.templates[i])
    }

    fn step(&self, v: TermId, rng: &mut Rng) -> Option<Edge> {
        let edges = self.g.out_slice(v);
        if edges.is_empty() {
            return None;
        }
        match self.bias {
            Bias::Uniform | Bias::Specificity => Some(edges[rng.gen_range(0..edges.len())]),
            Bias::Frequency => weighted(edges, rng, |e| self.g.predicate_frequency(e.predicate) as f64),
            Bias::PageRank => weighted(edges, rng, |e| self.node_weight[e.node.index()]),
        }
    }
}

fn weighted(edges: &[Edge], rng: &mut Rng, weight: impl Fn(&Edge) -> f64) -> Option<Edge> {
    let total: f64 = edges.iter().map(&weight).sum();
    if total <= 0.0 {
        return None;
    }
    let mut x = rng.gen::<f64>() * total;
    for e in edges {
        let w = weight(e);
        if x < w {
            return Some(*e);
        }
        x -= w;
    }
    edges.iter().rev().find(|e| weight(e) > 0.0).copied()
}

/// Walks from one entity under `strategy`.
pub fn extract_walks(g: &Graph, entity: TermId, strategy: &WalkStrategy<'_>, rng: &mut Rng) -> Result<WalkCorpus> {
    Walker::new(g, strategy)?.extract(entity, rng)
}

/// Walks from many entities, each on its own stream keyed by entity id.
/// Output is in the order of `entities` regardless of thread count.
pub fn extract_corpus(
    g: &Graph,
    entities: &[TermId],
    strategy: &WalkStrategy<'_>,
    seed: u64,
) -> Result<WalkCorpus> {
    let walker = Walker::new(g, strategy)?;
    let key_base = strategy.depth as u64 * 0x1000_0000_0000;
    let parts: Vec<WalkCorpus> = entities
        .par_iter()
        .map(|&e| walker.extract(e, &mut stream(seed, key_base + u64::from(e.0))))
        .collect::<Result<_>>()?;
    let mut out = WalkCorpus::default();
    for part in parts {
        out.append(part);
    }
    Ok(out)
}
