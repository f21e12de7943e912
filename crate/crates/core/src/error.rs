//! Error type shared across the crate.

use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An input violated a model invariant (bad grid, bad parameters, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A text input (channel CSV, config file) could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// The demand cannot be met under the per-channel power cap.
    #[error(
        "demand {demand_mbps} Mbps unachievable under the {cap_mw} mW per-channel cap: \
         achieved {achieved_mbps} Mbps, short {shortfall_mbps} Mbps"
    )]
    Infeasible {
        demand_mbps: f64,
        achieved_mbps: f64,
        shortfall_mbps: f64,
        cap_mw: f64,
    },

    /// An exhaustive solver was asked for more candidates than its budget allows.
    #[error("instance too large for exhaustive search: {required:.3e} candidates exceed budget {budget}; {hint}")]
    Budget {
        required: f64,
        budget: u64,
        hint: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
