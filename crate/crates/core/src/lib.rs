//! Specificity-weighted random walks over RDF knowledge graphs.
//!
//! The crate is organised along the processing pipeline:
//!
//! - [`graph`]: N-Triples ingestion into an immutable indexed multigraph.
//! - [`specificity`]: relevance of predicate-path templates to an entity
//!   type, computed exactly and with bidirectional random walks.
//! - [`walks`]: uniform and biased walk extraction with pruning.
//! - [`pagerank`]: PageRank scores for the PageRank-biased baseline.
//! - [`skipgram`]: skip-gram negative-sampling training over walk corpora.
//! - [`eval`]: top-k recommendation, precision@k, NDCG and sensitivity
//!   sweeps.

pub mod error;
pub mod eval;
pub mod graph;
pub mod pagerank;
pub mod rng;
pub mod skipgram;
pub mod specificity;
pub mod walks;

pub use error::{Error, Result};
pub use graph::{Edge, Graph, GraphBuilder, TermId, Triple};
