use thiserror::Error;

/// Errors raised by the model builders, integrators and post-processing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("matrix is not positive definite ({0})")]
    NotPositiveDefinite(&'static str),

    #[error("eigen-solver failure: {0}")]
    Eigen(String),

    #[error("non-finite value in stage `{stage}` at t = {t}")]
    NonFinite { stage: &'static str, t: f64 },

    #[error("step failed at t = {t}: {source}")]
    StepFailed {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("snapshot run {run} failed: {source}")]
    SnapshotRun {
        run: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("adaptive integrator: {0}")]
    Adaptive(String),

    #[error("instant t = {0} is not sampled by the trajectory")]
    MissingInstant(f64),

    #[error("unknown {kind} `{name}` (known: {known})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        known: String,
    },

    #[error("analysis: {0}")]
    Analysis(String),

    #[error("file format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
