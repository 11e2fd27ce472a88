//! JSON sidecars written next to every artifact.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    pub graph_checksum: Option<String>,
    #[serde(default)]
    pub details: serde_json::Value,
}

impl Metadata {
    pub fn new(command: &str, seed: u64, config_hash: String, graph_checksum: Option<String>) -> Self {
        Metadata {
            tool: format!("kgspec {}", env!("CARGO_PKG_VERSION")),
            command: command.to_string(),
            seed,
            config_hash,
            graph_checksum,
            details: serde_json::Value::Null,
        }
    }

    pub fn with_details<T: Serialize>(mut self, details: &T) -> Self {
        self.details = serde_json::to_value(details).expect("details serialize");
        self
    }
}

pub fn sidecar_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    artifact.with_file_name(name)
}

pub fn write_sidecar(artifact: &Path, meta: &Metadata) -> anyhow::Result<()> {
    let path = sidecar_path(artifact);
    let mut text = serde_json::to_string_pretty(meta)?;
    text.push('\n');
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_sidecar(artifact: &Path) -> anyhow::Result<Metadata> {
    let path = sidecar_path(artifact);
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
