use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate metric: det = {det:e} at theta = {theta}")]
    DegenerateMetric { det: f64, theta: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("length {0} is not a power of two >= 4")]
    NotPowerOfTwo(usize),

    #[error("truncation K = {k} exceeds M/2 = {half}")]
    Truncation { k: usize, half: usize },

    #[error("parameter layout mismatch: expected {expected} values, got {got}")]
    LayoutMismatch { expected: usize, got: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("tape: {0}")]
    Tape(String),

    #[error("non-finite loss at epoch {epoch}, step {step}: {detail}")]
    NonFinite {
        epoch: usize,
        step: usize,
        detail: String,
    },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("nu = {nu} is within {tol:e} of an integer")]
    NearInteger { nu: f64, tol: f64 },

    #[error("cell (N = {n}, trial = {trial}): {source}")]
    Cell {
        n: usize,
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
