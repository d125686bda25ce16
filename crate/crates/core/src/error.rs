use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("pole proximity in {func} at {at}")]
    Pole { func: &'static str, at: String },
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("order {n} exceeds the table bound {max}")]
    OrderTooLarge { n: usize, max: usize },
    #[error("moment of order {n} diverges (requires n < tau = {tau})")]
    MomentDivergence { n: f64, tau: f64 },
    #[error("invalid value for `{key}`: {msg}")]
    Constraint { key: &'static str, msg: String },
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("covariance factorization failed: {0}")]
    Factorization(String),
    #[error("{path}: line {line}: {msg}")]
    Parse { path: String, line: usize, msg: String },
    #[error("zero table coverage: {0}")]
    Coverage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn constraint(key: &'static str, msg: impl Into<String>) -> Self {
        Error::Constraint { key, msg: msg.into() }
    }
}
