use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ndcg;
use crate::error::{Error, Result};
use crate::graph::{Graph, TermId};
use crate::specificity::{rank_by_specificity, EstimatorParams, SpecificityTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    NWalks,
    SeedSetSize,
}

impl SweepAxis {
    pub fn label(self) -> &'static str {
        match self {
            SweepAxis::NWalks => "n_walks",
            SweepAxis::SeedSetSize => "seed_set_size",
        }
    }

    fn apply(self, base: &EstimatorParams, value: usize, seed: u64) -> EstimatorParams {
        let mut p = base.clone();
        p.seed = seed;
        match self {
            SweepAxis::NWalks => p.n_walks = value,
            SweepAxis::SeedSetSize => p.seed_set_size = value,
        }
        p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: usize,
    pub seed: u64,
    pub depth: usize,
    pub ndcg: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: usize,
    pub depth: usize,
    pub mean: f64,
    pub stddev: f64,
    pub runs: usize,
}

/// Runs the ranking at every `(value, seed)` and scores each table by NDCG
/// per depth against the table at the largest value for the same seed.
pub fn sensitivity_sweep(
    g: &Graph,
    t: TermId,
    base: &EstimatorParams,
    axis: SweepAxis,
    values: &[usize],
    seeds: &[u64],
) -> Result<Vec<SweepRow>> {
    let &truth_value = values.iter().max().ok_or_else(|| Error::InvalidParam("empty sweep".into()))?;
    if seeds.is_empty() {
        return Err(Error::InvalidParam("sweep needs at least one seed".into()));
    }
    let jobs: Vec<(usize, u64)> = seeds.iter().flat_map(|&s| values.iter().map(move |&v| (v, s))).collect();
    let tables: Vec<((usize, u64), SpecificityTable)> = jobs
        .par_iter()
        .map(|&(v, s)| rank_by_specificity(g, t, &axis.apply(base, v, s)).map(|table| ((v, s), table)))
        .collect::<Result<_>>()?;
    let by_key: BTreeMap<(usize, u64), &SpecificityTable> = tables.iter().map(|(k, t)| (*k, t)).collect();

    let mut rows = Vec::new();
    for &(v, s) in &jobs {
        let truth = by_key[&(truth_value, s)];
        let table = by_key[&(v, s)];
        for depth in 1..=base.max_depth {
            rows.push(SweepRow { value: v, seed: s, depth, ndcg: ndcg(table.depth(depth), truth.depth(depth)) });
        }
    }
    Ok(rows)
}

/// Mean and standard deviation over seeds, by `(value, depth)`.
pub fn mean_by_point(rows: &[SweepRow]) -> Vec<SweepPoint> {
    let mut groups: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.value, r.depth)).or_default().push(r.ndcg);
    }
    groups
        .into_iter()
        .map(|((value, depth), xs)| {
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            SweepPoint { value, depth, mean, stddev: var.sqrt(), runs: xs.len() }
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(axis: SweepAxis, points: &[SweepPoint], mut out: W) -> Result<()> {
    writeln!(out, "{},depth,ndcg,stddev,runs", axis.label())?;
    for p in points {
        writeln!(out, "{},{},{:.6},{:.6},{}", p.value, p.depth, p.mean, p.stddev, p.runs)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    #[test]
    fn single_point_is_self_comparison() {
        let mut b = GraphBuilder::new();
        for i in 0..20 {
            b.add_iris(&format!("f{i}"), "p", &format!("x{}", i % 3)).add_type(&format!("f{i}"), "T");
            b.add_iris(&format!("f{i}"), "q", &format!("y{}", i % 5));
        }
        let g = b.build();
        let t = g.lookup("T").unwrap();
        let base = EstimatorParams { n_walks: 50, seed_set_size: 10, ..Default::default() };
        let rows = sensitivity_sweep(&g, t, &base, SweepAxis::NWalks, &[50], &[1, 2]).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.ndcg == 1.0));
        let points = mean_by_point(&rows);
        assert_eq!(points.len(), 2);
        assert_eq!(points[0].runs, 2);
    }
}
