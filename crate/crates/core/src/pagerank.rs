//! PageRank scores for the PageRank-biased walk baseline.
//!
//! Scores are either computed by power iteration over the resource nodes of
//! a graph (literals are not part of the chain) or loaded from a TSV file of
//! externally computed, non-normalized values.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, ParseMode, TermId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreMap {
    pub scores: BTreeMap<TermId, f64>,
    /// True when the scores sum to one.
    pub normalized: bool,
}

impl ScoreMap {
    pub fn get(&self, v: TermId) -> Option<f64> {
        self.scores.get(&v).copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Dense lookup table over all term ids; unscored terms get 0.
    pub fn dense(&self, n_terms: usize) -> Vec<f64> {
        let mut v = vec![0.0; n_terms];
        for (&t, &s) in &self.scores {
            if t.index() < n_terms {
                v[t.index()] = s;
            }
        }
        v
    }

    pub fn scaled(&self, factor: f64) -> ScoreMap {
        ScoreMap {
            scores: self.scores.iter().map(|(&k, &v)| (k, v * factor)).collect(),
            normalized: false,
        }
    }

    /// Terms in descending score order, ties by id.
    pub fn ranking(&self) -> Vec<TermId> {
        let mut v: Vec<(TermId, f64)> = self.scores.iter().map(|(&k, &s)| (k, s)).collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        v.into_iter().map(|(k, _)| k).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PageRankResult {
    pub scores: ScoreMap,
    pub iterations: usize,
    /// L1 change after each iteration.
    pub residuals: Vec<f64>,
    pub converged: bool,
}

/// Power iteration with uniform teleport over resource nodes. Dangling
/// mass is spread uniformly. Stops once the L1 change drops below
/// `epsilon` or after `max_iters` iterations.
pub fn compute_pagerank(g: &Graph, damping: f64, epsilon: f64, max_iters: usize) -> Result<PageRankResult> {
    if !(damping > 0.0 && damping < 1.0) {
        return Err(Error::InvalidParam(format!("damping {damping} must lie in (0, 1)")));
    }
    let nodes: Vec<TermId> = g.nodes().filter(|&v| !g.is_literal(v)).collect();
    if nodes.is_empty() {
        return Err(Error::InvalidParam("graph has no resource nodes".into()));
    }
    let n = nodes.len();
    let mut pos = vec![u32::MAX; g.num_terms()];
    for (i, v) in nodes.iter().enumerate() {
        pos[v.index()] = i as u32;
    }
    let out_deg: Vec<f64> = nodes
        .iter()
        .map(|&v| g.out_slice(v).iter().filter(|e| !g.is_literal(e.node)).count() as f64)
        .collect();
    let inv_n = 1.0 / n as f64;

    let mut x = vec![inv_n; n];
    let mut residuals = Vec::new();
    let mut converged = false;
    for _ in 0..max_iters {
        let dangling: f64 = x.iter().zip(&out_deg).filter(|(_, &d)| d == 0.0).map(|(v, _)| v).sum();
        let base = (1.0 - damping) * inv_n + damping * dangling * inv_n;
        let next: Vec<f64> = nodes
            .par_iter()
            .map(|&v| {
                let pulled: f64 = g
                    .in_slice(v)
                    .iter()
                    .map(|e| {
                        let j = pos[e.node.index()] as usize;
                        x[j] / out_deg[j]
                    })
                    .sum();
                base + damping * pulled
            })
            .collect();
        let delta: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = next;
        residuals.push(delta);
        if delta < epsilon {
            converged = true;
            break;
        }
    }
    let total: f64 = x.iter().sum();
    let scores = nodes.iter().zip(&x).map(|(&v, &s)| (v, s / total)).collect();
    Ok(PageRankResult {
        scores: ScoreMap { scores, normalized: true },
        iterations: residuals.len(),
        residuals,
        converged,
    })
}

/// Scores keyed by IRI, as read from a file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawScores {
    pub scores: BTreeMap<String, f64>,
    pub duplicates: Vec<String>,
    pub skipped: Vec<u64>,
}

impl RawScores {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Resolves IRIs against `g`; returns the matched map and the IRIs that
    /// have no node in the graph.
    pub fn join(&self, g: &Graph) -> (ScoreMap, Vec<String>) {
        let mut scores = BTreeMap::new();
        let mut unmatched = Vec::new();
        for (iri, &s) in &self.scores {
            match g.lookup(iri) {
                Some(id) => {
                    scores.insert(id, s);
                }
                None => unmatched.push(iri.clone()),
            }
        }
        if !unmatched.is_empty() {
            log::warn!("{} scored IRIs not present in graph", unmatched.len());
        }
        (ScoreMap { scores, normalized: false }, unmatched)
    }
}

/// Reads `<iri>\t<score>` lines. Angle brackets are optional. Duplicate
/// IRIs keep the last value.
pub fn load_scores<R: BufRead>(reader: R, mode: ParseMode) -> Result<RawScores> {
    let mut out = RawScores::default();
    let mut seen: HashMap<String, ()> = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = i as u64 + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parsed = trimmed.split_once('\t').and_then(|(iri, score)| {
            let iri = iri.trim();
            let iri = iri.strip_prefix('<').and_then(|s| s.strip_suffix('>')).unwrap_or(iri);
            score.trim().parse::<f64>().ok().filter(|s| s.is_finite()).map(|s| (iri.to_string(), s))
        });
        match parsed {
            Some((iri, score)) => {
                if seen.insert(iri.clone(), ()).is_some() {
                    log::warn!("duplicate score for {iri} on line {line_no}; keeping the last");
                    out.duplicates.push(iri.clone());
                }
                out.scores.insert(iri, score);
            }
            None if line_no == 1 && !trimmed.contains('<') => {} // header
            None => {
                if mode == ParseMode::Strict {
                    return Err(Error::Parse { line: line_no, message: format!("bad score line: {trimmed}") });
                }
                out.skipped.push(line_no);
            }
        }
    }
    Ok(out)
}

pub fn write_scores<W: Write>(g: &Graph, scores: &ScoreMap, mut out: W) -> Result<()> {
    for (&t, &s) in &scores.scores {
        writeln!(out, "<{}>\t{:e}", g.term(t), s)?;
    }
    out.flush()?;
    Ok(())
}
