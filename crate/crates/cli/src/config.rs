use std::path::{Path, PathBuf};

use anyhow::Context;
use kgspec::skipgram::TrainConfig;
use kgspec::specificity::EstimatorParams;
use kgspec::walks::{Bias, Pruning};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WalkConfig {
    pub bias: Bias,
    pub pruning: Pruning,
    pub depth: usize,
    pub walks_per_entity: usize,
    /// Prepend depth-1 walks when `depth > 1`.
    pub with_depth1: bool,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig { bias: Bias::Uniform, pruning: Pruning::None, depth: 2, walks_per_entity: 500, with_depth1: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PageRankConfig {
    pub damping: f64,
    pub epsilon: f64,
    pub max_iters: usize,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        PageRankConfig { damping: 0.85, epsilon: 1e-10, max_iters: 200 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    /// Fixed k; by default each query uses the size of its truth set.
    pub k: Option<usize>,
    pub allow_mismatch: bool,
}

/// Everything a pipeline run depends on besides its input files. Flags
/// override values read from `--config`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub seed: u64,
    pub type_iri: Option<String>,
    pub graph: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub estimator: EstimatorParams,
    pub walk: WalkConfig,
    pub train: TrainConfig,
    pub pagerank: PageRankConfig,
    pub eval: EvalConfig,
    pub workers: Option<usize>,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Short hex digest of a serializable configuration.
    pub fn hash_of<T: Serialize>(value: &T) -> String {
        let bytes = serde_json::to_vec(value).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn resolve_path(&self, p: &Path) -> PathBuf {
        match &self.output_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }
}
