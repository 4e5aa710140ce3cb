use serde::Serialize;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure categories. Each maps to one CLI exit status.
#[derive(Debug, Clone, Error, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Error {
    /// Malformed or inconsistent input (degree mismatch, dangling names, ...).
    #[error("input error: {reason}")]
    Input { reason: String },

    /// An operation's precondition does not hold for the given arguments.
    #[error("precondition failed: {reason}")]
    Precondition { reason: String },

    /// An enumeration or table outgrew its budget.
    #[error("budget exceeded: {what} (limit {limit}, reached {reached})")]
    Resource {
        what: String,
        limit: u64,
        reached: u64,
    },

    /// A checked identity failed on the given data.
    #[error("property violated: {reason}")]
    Violation { reason: String },

    /// A check failed in a way attributable to the finite truncation depth.
    #[error("truncation artefact between levels {levels:?}: {reason}")]
    Artefact {
        levels: (usize, usize),
        reason: String,
    },

    /// Two routes that must agree did not. Always a bug.
    #[error("internal inconsistency: {reason}")]
    Internal { reason: String },
}

impl Error {
    pub fn input(reason: impl Into<String>) -> Self {
        Error::Input {
            reason: reason.into(),
        }
    }

    pub fn precondition(reason: impl Into<String>) -> Self {
        Error::Precondition {
            reason: reason.into(),
        }
    }

    pub fn resource(what: impl Into<String>, limit: u64, reached: u64) -> Self {
        Error::Resource {
            what: what.into(),
            limit,
            reached,
        }
    }

    pub fn violation(reason: impl Into<String>) -> Self {
        Error::Violation {
            reason: reason.into(),
        }
    }

    pub fn artefact(levels: (usize, usize), reason: impl Into<String>) -> Self {
        Error::Artefact {
            levels,
            reason: reason.into(),
        }
    }

    pub fn internal(reason: impl Into<String>) -> Self {
        Error::Internal {
            reason: reason.into(),
        }
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Violation { .. } | Error::Artefact { .. } | Error::Internal { .. } => 1,
            Error::Input { .. } | Error::Precondition { .. } => 2,
            Error::Resource { .. } => 3,
        }
    }
}
