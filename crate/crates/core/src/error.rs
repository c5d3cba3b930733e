use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input does not have the columns (or shape) the caller asked for.
    #[error("schema error: {0}")]
    Schema(String),

    /// A value outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no records left after filtering (category {category:?}, min_year {min_year})")]
    EmptySeries { category: String, min_year: i32 },

    #[error("series too short: {len} weeks, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },

    #[error("invalid prior configuration: {0}")]
    PriorConfig(String),

    #[error("parameter on the boundary of its support: {0}")]
    Boundary(String),

    #[error("invalid sampler configuration: {0}")]
    Config(String),

    #[error("sampling failed: every transition in all {chains} chains diverged")]
    SamplingFailed { chains: usize, divergences: Vec<usize> },

    #[error("empty posterior: no draws available")]
    EmptyPosterior,

    #[error("category map line {line}: {msg}")]
    CategoryMap { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
