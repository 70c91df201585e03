use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("capability exceeded: {0}")]
    Capability(String),
    #[error("invalid configuration: {0}")]
    Configuration(String),
    #[error("numerical failure: {message} (achieved {achieved:.3e})")]
    Numerical { message: String, achieved: f64 },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("insufficient resolution: {0}")]
    Resolution(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("fit failed: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn numerical(message: impl Into<String>, achieved: f64) -> Self {
        Error::Numerical {
            message: message.into(),
            achieved,
        }
    }

    /// Coarse classification used for process exit codes.
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Numerical { .. } | Error::Invariant(_) | Error::Fit(_) => ErrorCategory::Numerical,
            Error::Domain(_) | Error::Configuration(_) | Error::Precondition(_) => ErrorCategory::Usage,
            Error::Capability(_) | Error::Resolution(_) => ErrorCategory::Resource,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Numerical,
    Usage,
    Resource,
}

pub(crate) fn ensure_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {v}")))
    }
}
