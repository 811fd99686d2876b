use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: self-loop {node} -> {node} is not allowed")]
    SelfLoop { line: usize, node: String },

    /// A statistic or probability was requested outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dyad ({0}, {1}) is not in the dyad universe of this network")]
    UnknownDyad(usize, usize),

    #[error("dyad ({0}, {1}) is already missing")]
    AlreadyMissing(usize, usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot fit {model}: {reason}")]
    Fit { model: &'static str, reason: String },

    #[error("trial {trial}, iteration {iteration}: {source}")]
    Iteration {
        trial: usize,
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("dataset `{name}`: file not found at {}", path.display())]
    DatasetMissing { name: String, path: PathBuf },

    #[error("dataset `{name}`: {message}")]
    DatasetIntegrity { name: String, message: String },

    #[error("unknown dataset `{0}`")]
    UnknownDataset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn fit(model: &'static str, reason: impl Into<String>) -> Self {
        Error::Fit {
            model,
            reason: reason.into(),
        }
    }
}
