use thiserror::Error;

/// Errors raised by the numerical pipelines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{operation} requires {requirement}")]
    Domain {
        operation: &'static str,
        requirement: &'static str,
    },

    #[error("adaptive quadrature did not converge on [{a}, {b}] (error estimate {estimate:e}, {segments} segments)")]
    QuadratureNonConvergence {
        a: f64,
        b: f64,
        estimate: f64,
        segments: usize,
    },

    #[error("covariance matrix is singular (det = {det:e})")]
    SingularCovariance { det: f64 },

    #[error("Fisher information evaluated to {value:e}, below the round-off floor")]
    NegativeFisher { value: f64 },

    #[error("Gauss-Hermite expectation did not converge (difference {difference:e})")]
    GridNonConvergence { difference: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite, got {value}")))
    }
}
