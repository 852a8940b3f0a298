//! Error type shared across scenario parsing, simulation and reporting.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    /// A scenario or metric request violates an invariant. Names the
    /// offending field so callers can surface actionable messages.
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    #[error("failed to parse {path}: {message}")]
    Parse { path: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl SimError {
    pub fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        SimError::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 for validation/parse problems,
    /// 3 for runtime (I/O) failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Validation { .. } | SimError::Parse { .. } => 2,
            SimError::Io { .. } => 3,
        }
    }
}
