use thiserror::Error;

use crate::optimizer::ParamState;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("step sizes must be strictly positive, got {0}")]
    InvalidStep(f64),

    #[error("reduced prox requires b in (0, 1), got {0}")]
    Regime(f64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid response at row {row}: {msg}")]
    InvalidResponse { row: usize, msg: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("fit diverged at iteration {iteration} (objective {objective})")]
    Diverged {
        iteration: usize,
        objective: f64,
        last_state: Box<ParamState>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
