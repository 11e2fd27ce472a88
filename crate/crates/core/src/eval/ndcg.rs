use std::collections::HashMap;

use crate::specificity::{Relationship, SpecificityEntry};

/// `Σ gain_i / log2(i + 1)` over 1-based ranks.
pub fn dcg(gains: impl IntoIterator<Item = f64>) -> f64 {
    gains.into_iter().enumerate().map(|(i, g)| g / ((i + 2) as f64).log2()).sum()
}

/// NDCG of `ranked` against `ideal`. An item's gain is its score in
/// `ideal`, 0 when absent. No rank cutoff. Returns 1.0 when the ideal DCG
/// is 0.
pub fn ndcg(ranked: &[SpecificityEntry], ideal: &[SpecificityEntry]) -> f64 {
    let gain: HashMap<&Relationship, f64> = ideal.iter().map(|e| (&e.relationship, e.score.max(0.0))).collect();
    let mut ideal_gains: Vec<f64> = gain.values().copied().collect();
    ideal_gains.sort_by(|a, b| b.total_cmp(a));
    let idcg = dcg(ideal_gains);
    if idcg == 0.0 {
        log::debug!("ideal DCG is 0; NDCG defined as 1");
        return 1.0;
    }
    let got = dcg(ranked.iter().map(|e| gain.get(&e.relationship).copied().unwrap_or(0.0)));
    (got / idcg).clamp(0.0, 1.0)
}
