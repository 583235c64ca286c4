use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("symbol '{0}' is not in the alphabet")]
    UnknownSymbol(String),

    #[error("'-' is reserved for the gap and cannot be used as a label")]
    ReservedGap,

    #[error("invalid symbol '{0}': symbols are non-empty and use only [A-Za-z0-9_]")]
    InvalidSymbol(String),

    #[error("duplicate symbol '{0}' in alphabet")]
    DuplicateSymbol(String),

    #[error("dataset has no records")]
    EmptyDataset,

    #[error("format error: {0}")]
    Format(String),

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("cost function is not a pseudo-metric: {0}")]
    NotPseudoMetric(String),

    #[error("cost function has negative entries; {0}")]
    NegativeCost(String),

    #[error("enumeration guard exceeded: |x|*|y| = {product} > {limit}")]
    SizeGuard { product: usize, limit: usize },

    #[error("size cap {cap} too small to connect the trees")]
    Unreachable { cap: usize },

    #[error("invalid edit script: {0}")]
    InvalidScript(String),

    #[error("zero vector image: cosine cost is undefined")]
    ZeroImage,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("class '{0}' has a single record; no same-class partner exists")]
    SingletonClass(String),

    #[error("need at least two classes, found {0}")]
    TooFewClasses(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("infeasible split: {0}")]
    Infeasible(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
