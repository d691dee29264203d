use thiserror::Error;

/// Errors raised by the enumeration engine.
///
/// Unit indices embedded in messages are 1-based, matching scenario files.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("network has {n} units, above the enumeration cap of {cap}")]
    EnumerationCap { n: usize, cap: usize },

    #[error("subnetwork has {m} units, above the isomorphism cap of {cap}")]
    IsomorphismCap { m: usize, cap: usize },

    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("no outcome stored for context {context}, unit {unit}, assignment {assignment} and no default configured")]
    MissingCell {
        context: String,
        unit: usize,
        assignment: String,
    },

    #[error("overlap violation: P(T_{unit} = {value}) = 0 in context {context}")]
    OverlapViolation {
        unit: usize,
        value: String,
        context: String,
    },

    #[error("subpopulation is empty")]
    EmptySubpopulation,

    #[error("exposure value {value} does not pin down the neighborhood of unit {unit}: {detail}")]
    PindownViolation {
        unit: usize,
        value: String,
        detail: String,
    },

    #[error("best-response iteration cycles with period {period} and no fixed point was reached")]
    NoConvergence { period: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("structural evaluator failed for unit {unit} ({scope}): {message}")]
    Evaluator {
        unit: usize,
        scope: String,
        message: String,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("scenario validation failed:\n  - {}", .0.join("\n  - "))]
    Validation(Vec<String>),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Validation(_) | Error::Io(_) | Error::InvalidNetwork(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
