use std::fmt;

use proxlasso_core::Error;

/// Command failure, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Exit 1.
    Config(String),
    /// Exit 2.
    Data(String),
    /// Exit 3: divergence or numerical failure.
    Failure(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) => 2,
            CliError::Failure(_) => 3,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Failure(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = match &e {
            Error::Config(m) => m.clone(),
            Error::Data(m) => m.clone(),
            _ => e.to_string(),
        };
        match e {
            Error::Config(_) | Error::InvalidStep(_) | Error::Regime(_) => CliError::Config(msg),
            Error::Data(_)
            | Error::Dimension(_)
            | Error::InvalidResponse { .. }
            | Error::Domain(_)
            | Error::Io(_)
            | Error::Csv(_) => CliError::Data(msg),
            Error::Diverged { .. } | Error::Numerical(_) => CliError::Failure(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(e.to_string())
    }
}
