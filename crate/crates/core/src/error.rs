use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside its admissible range.
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// A joint constraint between parameters is violated (e.g. the weight simplex).
    #[error("{0} violated")]
    Constraint(&'static str),

    /// Survival probability underflowed to zero, so the hazard is not representable.
    #[error("hazard overflow at x = {x}: survival probability is numerically zero")]
    HazardOverflow { x: f64 },

    #[error("numerical integration did not converge: estimate {estimate}, error estimate {error}")]
    Integration { estimate: f64, error: f64 },

    #[error("root bracketing failed: {0}")]
    Bracketing(String),

    /// Acceptance-rejection sampling accepted far fewer proposals than the envelope predicts.
    #[error(
        "envelope violation: acceptance rate {rate:.4} after {proposals} proposals is below 1/(10k) with k = {k}"
    )]
    EnvelopeViolation { rate: f64, proposals: u64, k: f64 },

    #[error("proposal shape error: {0}")]
    ProposalShape(String),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("{path}:{line}: {message}")]
    DataParse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("sample of size {n} is too small for estimation (need at least {min})")]
    InsufficientData { n: usize, min: usize },

    #[error("estimator {estimator} is not supported for distribution {dist}")]
    Unsupported {
        estimator: &'static str,
        dist: &'static str,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("comparison error: {0}")]
    Comparison(String),

    #[error("optimizer error: {0}")]
    Optimizer(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            reason,
        }
    }
}
