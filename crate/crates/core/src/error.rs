use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A set, pattern or family description violates its construction rules.
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Materialization would exceed the configured memory budget.
    #[error("resource limit: {what} needs {requested} bytes, budget is {limit} bytes")]
    Resource { what: String, requested: u64, limit: u64 },

    /// A pattern value falls outside the materialized range `[1, N]`.
    #[error("pattern value {value} exceeds truncation length N={limit}")]
    Range { value: u64, limit: u64 },

    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("insufficient horizon: need coordinate {needed}, point covers [0, {available}]")]
    Horizon { needed: u64, available: u64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidSpec(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
