use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    estimate_specificity, exact_specificity, select_paths, EdgePolicy, EstimateOptions, Relationship,
    SelectOptions, SpecificityEntry,
};
use crate::error::{Error, Result};
use crate::graph::{Graph, TermId};
use crate::rng::{key_of_str, stream};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Bidirectional random walks.
    #[default]
    Alg2,
    /// Exhaustive path counting over all instances of the type.
    Eq2,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Alg2 => "alg2",
            Method::Eq2 => "eq2",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorParams {
    pub seed_set_size: usize,
    pub n_walks: usize,
    /// Depth `i` keeps `candidates_per_depth * i` candidate templates.
    pub candidates_per_depth: usize,
    pub max_depth: usize,
    pub threshold: f64,
    pub forward_retry_limit: usize,
    pub seed: u64,
    pub method: Method,
    /// `rdf:type` edges count as ordinary edges for reverse paths.
    pub type_edges_in_paths: bool,
    /// `rdf:type` may appear in candidate templates.
    pub type_in_templates: bool,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        EstimatorParams {
            seed_set_size: 300,
            n_walks: 2000,
            candidates_per_depth: 25,
            max_depth: 2,
            threshold: 0.5,
            forward_retry_limit: 10,
            seed: 0,
            method: Method::Alg2,
            type_edges_in_paths: true,
            type_in_templates: false,
        }
    }
}

impl EstimatorParams {
    pub fn validate(&self) -> Result<()> {
        if self.seed_set_size == 0 || self.max_depth == 0 || self.candidates_per_depth == 0 {
            return Err(Error::InvalidParam(
                "seed_set_size, max_depth and candidates_per_depth must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::InvalidParam(format!("threshold {} outside [0, 1]", self.threshold)));
        }
        if self.method == Method::Alg2 && self.n_walks == 0 {
            return Err(Error::InvalidParam("n_walks must be positive".into()));
        }
        Ok(())
    }

    pub fn policy(&self) -> EdgePolicy {
        EdgePolicy { include_type_edges: self.type_edges_in_paths }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableMeta {
    pub type_iri: String,
    pub method: Method,
    pub params: EstimatorParams,
    /// Seeds actually drawn; smaller than requested when the type has
    /// fewer instances.
    pub seed_set_actual: usize,
    pub graph_checksum: Option<String>,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecificityTable {
    /// `depths[i]` holds depth `i + 1`, sorted by descending score.
    pub depths: Vec<Vec<SpecificityEntry>>,
    pub meta: TableMeta,
}

impl SpecificityTable {
    pub fn depth(&self, d: usize) -> &[SpecificityEntry] {
        d.checked_sub(1).and_then(|i| self.depths.get(i)).map_or(&[], Vec::as_slice)
    }

    /// Entries at depth `d` scoring at least the table threshold.
    pub fn above_threshold(&self, d: usize) -> impl Iterator<Item = &SpecificityEntry> {
        let threshold = self.meta.params.threshold;
        self.depth(d).iter().filter(move |e| e.score >= threshold)
    }
}

/// Descending score, then ascending predicate ids.
pub fn sort_entries(entries: &mut [SpecificityEntry]) {
    entries.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.relationship.cmp(&b.relationship))
    });
}

const METHOD_NOTE: &str = "alg2 weights reachable nodes by forward-walk multiplicity and reverse paths by inverse \
in-degree products; eq2 averages path-count ratios uniformly over distinct reachable nodes. They coincide when \
incoming-path composition is homogeneous across the reachable set.";

/// Builds the per-depth ranked table for type `t`.
pub fn rank_by_specificity(g: &Graph, t: TermId, params: &EstimatorParams) -> Result<SpecificityTable> {
    params.validate()?;
    let sample = g.sample_entities(t, params.seed_set_size, &mut stream(params.seed, key_of_str("seed-set")))?;
    let seeds = sample.entities;
    let select_opts = SelectOptions { exclude_type_predicate: !params.type_in_templates, ..Default::default() };
    let est_opts = EstimateOptions { forward_retry_limit: params.forward_retry_limit, policy: params.policy() };

    let mut depths: Vec<Vec<SpecificityEntry>> = Vec::with_capacity(params.max_depth);
    for i in 1..=params.max_depth {
        let prev = depths.last().map(Vec::as_slice);
        let candidates = select_paths(
            g,
            &seeds,
            i,
            params.candidates_per_depth * i,
            prev,
            params.threshold,
            select_opts,
            &mut stream(params.seed, key_of_str(&format!("select-{i}"))),
        )?;
        let mut entries = match params.method {
            Method::Alg2 => estimate_specificity(
                g,
                &candidates,
                &seeds,
                t,
                i,
                params.n_walks,
                est_opts,
                &mut stream(params.seed, key_of_str(&format!("estimate-{i}"))),
            )?,
            Method::Eq2 => candidates
                .par_iter()
                .map(|rel| exact_specificity(g, rel, t, params.policy()))
                .collect::<Result<Vec<_>>>()?,
        };
        sort_entries(&mut entries);
        log::debug!("depth {i}: {} candidates scored", entries.len());
        depths.push(entries);
    }

    Ok(SpecificityTable {
        depths,
        meta: TableMeta {
            type_iri: g.term(t).to_string(),
            method: params.method,
            params: params.clone(),
            seed_set_actual: seeds.len(),
            graph_checksum: None,
            note: METHOD_NOTE.to_string(),
        },
    })
}

/// TSV with header `depth relationship score support`; scores to six
/// decimals, relationships as predicate IRIs joined by `|`.
pub fn write_table_tsv<W: Write>(g: &Graph, table: &SpecificityTable, mut out: W) -> Result<()> {
    writeln!(out, "depth\trelationship\tscore\tsupport")?;
    for (i, entries) in table.depths.iter().enumerate() {
        for e in entries {
            writeln!(out, "{}\t{}\t{:.6}\t{}", i + 1, e.relationship.render(g), e.score, e.support)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads the TSV entries back against `g`; metadata comes from the sidecar.
pub fn read_table_tsv<R: BufRead>(g: &Graph, reader: R, meta: TableMeta) -> Result<SpecificityTable> {
    let mut depths: Vec<Vec<SpecificityEntry>> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = i as u64 + 1;
        if line_no == 1 && line.starts_with("depth") || line.trim().is_empty() {
            continue;
        }
        let bad = |m: &str| Error::Parse { line: line_no, message: m.to_string() };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(bad("expected 4 columns"));
        }
        let depth: usize = cols[0].parse().map_err(|_| bad("bad depth"))?;
        let relationship = Relationship::parse(g, cols[1])?;
        if depth == 0 || relationship.depth() != depth {
            return Err(bad("relationship length does not match depth"));
        }
        let score: f64 = cols[2].parse().map_err(|_| bad("bad score"))?;
        let support: u64 = cols[3].parse().map_err(|_| bad("bad support"))?;
        if depths.len() < depth {
            depths.resize(depth, Vec::new());
        }
        depths[depth - 1].push(SpecificityEntry { relationship, score, support });
    }
    for d in depths.iter_mut() {
        sort_entries(d);
    }
    Ok(SpecificityTable { depths, meta })
}
