use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// An adaptive integral failed to reach its tolerance.
    #[error("quadrature did not converge: achieved {achieved:.3e}, requested {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },

    /// A function evaluated to NaN or infinity during a scan.
    #[error("non-finite value {value} at abscissa {at}")]
    NonFinite { at: f64, value: f64 },

    /// Two quantities that theory ties together disagree.
    #[error("inconsistency: {0}")]
    Inconsistent(String),

    /// A proven bound was exceeded; this indicates a numerical bug.
    #[error("theory violation: {0}")]
    TheoryViolation(String),

    /// An iterative solver failed to reach its stopping rule.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// Malformed or invalid serialized input.
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
