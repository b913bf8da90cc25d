use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulation and evaluation engine.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid model or strategy parameters.
    #[error("invalid parameter: {0}")]
    Param(String),

    /// An input file does not follow the expected schema.
    #[error("schema error in {path}: {message}")]
    Schema { path: PathBuf, message: String },

    /// A scenario file is not rectangular.
    #[error("shape error in {path}: path {path_id}: {message}")]
    Shape {
        path: PathBuf,
        path_id: usize,
        message: String,
    },

    /// A function was evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A regression estimator produced an unusable value.
    #[error("estimator error: {0}")]
    Estimator(String),

    #[error("career schedule error: {0}")]
    Schedule(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Param(msg.into())
    }

    /// True for errors caused by bad inputs (configuration, files), as
    /// opposed to numerical failures during a run.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Param(_)
                | Error::Schema { .. }
                | Error::Shape { .. }
                | Error::Schedule(_)
                | Error::Io { .. }
                | Error::Csv { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
