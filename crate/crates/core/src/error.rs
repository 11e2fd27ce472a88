use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("unknown term id {0}")]
    UnknownTerm(u32),

    #[error("term not present in graph: {0}")]
    UnknownIri(String),

    #[error("no entities of type {0}")]
    EmptyType(String),

    #[error("invalid triple: {0}")]
    InvalidTriple(String),

    #[error("invalid snapshot: {0}")]
    Snapshot(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("vocabulary is empty after min-count filtering")]
    EmptyVocabulary,

    #[error("token not in vocabulary: {0}")]
    OutOfVocabulary(String),

    #[error("malformed model file: {0}")]
    Model(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
