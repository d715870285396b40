use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("separation violated: d(alt, truth) = {distance} < epsilon = {epsilon}")]
    SeparationViolated { distance: f64, epsilon: f64 },

    #[error("epsilon = {epsilon} must lie in (0, sigma0 = {sigma0})")]
    EpsilonOutOfRange { epsilon: f64, sigma0: f64 },

    #[error("{what} did not converge: {detail}")]
    NonConvergence { what: &'static str, detail: String },

    #[error("budget exceeded: {what} needs {required}, limit is {limit}")]
    BudgetExceeded {
        what: &'static str,
        required: f64,
        limit: f64,
    },

    #[error("value {value} outside domain {domain}")]
    OutOfDomain { value: f64, domain: &'static str },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("tabulated density: {0}")]
    Tabulation(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be positive and finite, got {value}"),
        ))
    }
}
