use std::path::PathBuf;

use thiserror::Error;

use crate::model::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input file could not be opened or parsed.
    #[error("cannot ingest {}: {message}", path.display())]
    Ingest { path: PathBuf, message: String },

    #[error("dataset failed validation with {} violation(s)", .0.violations.len())]
    Validation(ValidationReport),

    /// An argument outside the operation's domain.
    #[error("{0}")]
    Domain(String),

    #[error("cannot downscale `{indicator}`: country {country} has zero total proxy weight")]
    Downscale { indicator: String, country: String },

    #[error("cannot normalize: territory {territory} has denominator {value}")]
    Normalize { territory: String, value: f64 },

    #[error("degenerate geometry: {0}")]
    Geometry(String),

    #[error("{0}")]
    Preprocess(String),

    #[error("indicator `{0}` has zero variance")]
    ZeroVariance(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("{index} index is undefined: {reason}")]
    IndexUndefined { index: &'static str, reason: String },

    #[error("k vote failed: {0}")]
    Vote(String),

    #[error("cannot seed {k} centroids from {distinct} distinct point(s)")]
    Seeding { k: usize, distinct: usize },

    #[error("territory {0} has no cluster assignment")]
    MissingAssignment(String),

    #[error("cannot write {}: {message}", path.display())]
    Export { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn ingest(path: impl Into<PathBuf>, msg: impl ToString) -> Self {
        Error::Ingest {
            path: path.into(),
            message: msg.to_string(),
        }
    }

    pub(crate) fn export(path: impl Into<PathBuf>, msg: impl ToString) -> Self {
        Error::Export {
            path: path.into(),
            message: msg.to_string(),
        }
    }
}
