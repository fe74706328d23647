use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid genotype: genes exhausted after {consumed} of {len} before the derivation completed")]
    InvalidGenotype { consumed: usize, len: usize },

    #[error("gene {index} has value {value}, above max value {max_value}")]
    GeneOutOfRange { index: usize, value: u32, max_value: u32 },

    #[error("malformed genotype text: {0}")]
    GenotypeText(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}:{line}: {msg}")]
    ConfigSyntax { path: String, line: usize, msg: String },

    #[error("{path}: {msg}")]
    Record { path: PathBuf, msg: String },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn record(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Record { path: path.into(), msg: msg.into() }
    }
}
