use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid input: {0}")]
    Domain(String),

    /// The adaptive integrator could not meet its tolerance.
    #[error("integrator failed at t = {t}: {reason} (error estimate {error_estimate:.3e})")]
    Integrator {
        t: f64,
        error_estimate: f64,
        reason: String,
    },

    /// A grid or basis truncation lost more probability mass than allowed.
    #[error("truncation lost {lost:.3e} of probability mass (limit {limit:.1e}); {hint}")]
    Truncation { lost: f64, limit: f64, hint: String },

    /// A numerical result fell outside its physical range.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
