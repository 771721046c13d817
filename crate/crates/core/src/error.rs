//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: expected {expected} fields, found {found}")]
    RowArity {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("hierarchy error: {0}")]
    Hierarchy(String),
    #[error("value {value:?} is not in the hierarchy domain of {attribute:?}")]
    Domain { attribute: String, value: String },
    #[error("generalization level {level} out of range 0..={max}")]
    LevelRange { level: usize, max: usize },
    #[error("stratified split impossible: {0}")]
    Stratification(String),
    #[error("k-anonymity infeasible: dataset has {n} rows, fewer than k = {k}")]
    Infeasible { n: usize, k: u32 },
    #[error("degenerate labels: training data contains a single class")]
    DegenerateLabels,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("energy probe unavailable: {0}")]
    ProbeUnavailable(String),
    #[error("probe error: {0}")]
    Probe(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
