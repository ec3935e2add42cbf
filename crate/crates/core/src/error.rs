use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of a cost equation.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    /// A configuration value violates a documented invariant.
    #[error("invalid configuration: {field}: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    /// One or more layer invariants failed; every violation is listed.
    #[error("invalid network {name}: {}", violations.join("; "))]
    InvalidNetwork {
        name: String,
        violations: Vec<String>,
    },

    #[error("mapping {mapping} is infeasible: {reason}")]
    InfeasibleMapping { mapping: String, reason: String },

    #[error("cache bandwidth {available} bits/cycle is below the {required} bits/cycle the macro consumes")]
    BandwidthFit { available: f64, required: f64 },

    #[error("integer overflow while computing {what}")]
    Overflow { what: &'static str },
}

impl Error {
    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            op,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by user-supplied configuration or workload files,
    /// as opposed to failures while evaluating the model.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig { .. }
                | Error::Io { .. }
                | Error::Parse { .. }
                | Error::InvalidNetwork { .. }
        )
    }
}
