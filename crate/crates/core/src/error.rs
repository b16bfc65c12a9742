//! Error type shared by every module.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong in a computation.
///
/// Errors split into *domain* errors (the input is meaningful but the
/// operation refuses it, e.g. a cyclic relation handed to the collapse) and
/// *usage* errors (malformed text, bad arity).  [`Error::is_usage`] tells the
/// command-line front end which exit code to use.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("size limit exceeded: {what} (limit {limit})")]
    SizeLimit { what: String, limit: usize },

    #[error("relation is not well founded; witness cycle: {}", .cycle.join(" -> "))]
    NotWellFounded { cycle: Vec<String> },

    #[error("assignment too short: formula needs {needed} values, got {got}")]
    AssignmentTooShort { needed: usize, got: usize },

    #[error("formula is not in negation normal form: {0}")]
    NotNnf(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("arity error: {0}")]
    Arity(String),

    #[error("unbound constant `{0}`")]
    Unbound(String),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("strategy is not winning: {0}")]
    NonWinningStrategy(String),

    #[error("invalid recursion instance: {0}")]
    InvalidInstance(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("insufficient input: {0}")]
    InsufficientInput(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("json error: {0}")]
    Json(String),
}

impl Error {
    pub(crate) fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse { pos, msg: msg.into() }
    }

    pub(crate) fn size(what: impl Into<String>, limit: usize) -> Self {
        Error::SizeLimit { what: what.into(), limit }
    }

    /// True for errors caused by malformed invocations rather than by the
    /// mathematics (exit code 2 instead of 1 on the command line).
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. } | Error::Arity(_) | Error::Unbound(_) | Error::Io(_) | Error::Json(_)
        )
    }

    /// Short machine-readable discriminant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::SizeLimit { .. } => "size-limit",
            Error::NotWellFounded { .. } => "not-well-founded",
            Error::AssignmentTooShort { .. } => "assignment-too-short",
            Error::NotNnf(_) => "not-nnf",
            Error::Parse { .. } => "parse",
            Error::Arity(_) => "arity",
            Error::Unbound(_) => "unbound",
            Error::InvalidStrategy(_) => "invalid-strategy",
            Error::NonWinningStrategy(_) => "non-winning-strategy",
            Error::InvalidInstance(_) => "invalid-instance",
            Error::ContractViolation(_) => "contract-violation",
            Error::InsufficientInput(_) => "insufficient-input",
            Error::InvalidInput(_) => "invalid-input",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
