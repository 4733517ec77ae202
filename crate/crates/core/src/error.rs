use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An exhaustive computation was refused because its size exceeds the configured guard.
    #[error("refusing {what}: n = {n} exceeds guard {guard} (about {cost:.3e} evaluations)")]
    GuardExceeded {
        what: &'static str,
        n: usize,
        guard: usize,
        cost: f64,
    },

    #[error("parameters fall in regime {actual}, which this procedure does not handle")]
    WrongRegime { actual: String },

    /// A certifier stage produced nothing usable and the fallback is disabled.
    #[error("certifier pipeline degenerated: {0}")]
    Degenerate(String),

    #[error("internal inconsistency: {0}")]
    Internal(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
