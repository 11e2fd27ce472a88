//! Top-k recommendation over trained embeddings and the ranking metrics
//! used to evaluate it and the specificity tables.

mod ndcg;
mod sweep;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::skipgram::EmbeddingModel;

pub use ndcg::{dcg, ndcg};
pub use sweep::{mean_by_point, sensitivity_sweep, write_sweep_csv, SweepAxis, SweepPoint, SweepRow};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub query: String,
    pub k: usize,
    /// Non-increasing cosine; ties by token.
    pub items: Vec<(String, f64)>,
}

impl Recommendation {
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|(t, _)| t.as_str())
    }
}

/// Cosine similarity; 0 when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na * nb)
}

/// Unit-normalized copy of a model's input vectors for repeated queries.
pub struct Recommender<'m> {
    model: &'m EmbeddingModel,
    unit: Vec<f64>,
}

impl<'m> Recommender<'m> {
    pub fn new(model: &'m EmbeddingModel) -> Self {
        let dim = model.dim;
        let mut unit = model.input.clone();
        for row in unit.chunks_mut(dim) {
            let n = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 0.0 {
                row.iter_mut().for_each(|x| *x /= n);
            }
        }
        Recommender { model, unit }
    }

    /// The `k` most similar tokens to `query`, excluding `query`, restricted
    /// to `candidates` when given.
    pub fn top_k(&self, query: &str, k: usize, candidates: Option<&HashSet<String>>) -> Result<Recommendation> {
        if k == 0 {
            return Err(Error::InvalidParam("k must be at least 1".into()));
        }
        let vocab = &self.model.vocab;
        let q = vocab.index_of(query).ok_or_else(|| Error::OutOfVocabulary(query.to_string()))?;
        let dim = self.model.dim;
        let qv = &self.unit[q * dim..(q + 1) * dim];
        let mut scored: Vec<(&str, f64)> = (0..vocab.len())
            .filter(|&i| i != q)
            .map(|i| (vocab.token(i), i))
            .filter(|(tok, _)| candidates.is_none_or(|c| c.contains(*tok)))
            .map(|(tok, i)| {
                let row = &self.unit[i * dim..(i + 1) * dim];
                (tok, row.iter().zip(qv).map(|(a, b)| a * b).sum::<f64>())
            })
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        scored.truncate(k);
        Ok(Recommendation {
            query: query.to_string(),
            k,
            items: scored.into_iter().map(|(t, s)| (t.to_string(), s)).collect(),
        })
    }
}

pub fn top_k(model: &EmbeddingModel, query: &str, k: usize, candidates: Option<&HashSet<String>>) -> Result<Recommendation> {
    Recommender::new(model).top_k(query, k, candidates)
}

/// Query token → relevant tokens.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroundTruth(pub BTreeMap<String, BTreeSet<String>>);

impl GroundTruth {
    pub fn from_json<R: Read>(reader: R) -> Result<Self> {
        let truth: GroundTruth = serde_json::from_reader(reader)?;
        truth.validate()?;
        Ok(truth)
    }

    pub fn validate(&self) -> Result<()> {
        for (q, rel) in &self.0 {
            if rel.contains(q) {
                return Err(Error::InvalidParam(format!("query {q} listed in its own relevant set")));
            }
        }
        Ok(())
    }

    pub fn relevant(&self, query: &str) -> Option<&BTreeSet<String>> {
        self.0.get(query)
    }
}

fn hits(rec: &Recommendation, relevant: &BTreeSet<String>) -> usize {
    rec.tokens().filter(|t| relevant.contains(*t)).count()
}

/// `|top-k ∩ relevant| / k`.
pub fn precision_at_k(rec: &Recommendation, relevant: &BTreeSet<String>) -> f64 {
    hits(rec, relevant) as f64 / rec.k as f64
}

/// `|top-k ∩ relevant| / |relevant|`; equals precision when `k = |relevant|`.
pub fn recall_at_k(rec: &Recommendation, relevant: &BTreeSet<String>) -> f64 {
    if relevant.is_empty() {
        return 0.0;
    }
    hits(rec, relevant) as f64 / relevant.len() as f64
}
