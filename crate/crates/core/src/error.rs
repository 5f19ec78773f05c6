use thiserror::Error;

use crate::ode::OdeError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(transparent)]
    Integration(#[from] OdeError),

    #[error("propagator deviates from unitarity by {defect:.3e}")]
    NonUnitary { defect: f64 },

    #[error("ambiguous branch matching: quasi-energy spacing {spacing:.3e} J below threshold {threshold:.3e} J")]
    AmbiguousBranch { spacing: f64, threshold: f64 },

    #[error("branch continuation failed at rabi ratio {ratio}: {reason}")]
    Continuation { ratio: f64, reason: String },

    #[error("no avoided crossing found: {0}")]
    NoAvoidedCrossing(String),

    #[error("channel basis is not closed under couplings: {0}")]
    BasisNotClosed(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Rejects non-finite values.
pub(crate) fn finite(name: &'static str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::invalid(name, format!("must be finite, got {x}")))
    }
}

pub(crate) fn positive(name: &'static str, x: f64) -> Result<f64> {
    finite(name, x)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(Error::invalid(name, format!("must be > 0, got {x}")))
    }
}

pub(crate) fn non_negative(name: &'static str, x: f64) -> Result<f64> {
    finite(name, x)?;
    if x >= 0.0 {
        Ok(x)
    } else {
        Err(Error::invalid(name, format!("must be >= 0, got {x}")))
    }
}
