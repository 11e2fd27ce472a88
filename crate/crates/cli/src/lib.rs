//! Command-line pipeline: ingest, PageRank, specificity tables, walks,
//! embedding training, recommendation and evaluation.

pub mod commands;
pub mod config;
pub mod meta;
pub mod synth;

pub use commands::{run, Cli, CliError, CliResult};
