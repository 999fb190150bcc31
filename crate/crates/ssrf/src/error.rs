//! Error type shared by all modules.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, SsrfError>;

/// Errors produced by model validation, evaluation, and simulation.
#[derive(Debug, Error)]
pub enum SsrfError {
    /// A model or grid parameter is out of its admissible range.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// The requested quantity diverges for this configuration
    /// (e.g. the d=3, μ=0 variance at zero lag).
    #[error("singular configuration: {0}")]
    Singular(String),

    /// A closed-form method was requested outside its domain of validity.
    #[error("method `{method}` not applicable: {reason}")]
    WrongMethod { method: &'static str, reason: String },

    /// A numerical routine could not reach its accuracy target. Carries the
    /// partial result and its estimated error so callers can still inspect it.
    #[error("accuracy target not met: {reason} (partial value {partial:e}, est. error {est_error:e})")]
    Accuracy {
        reason: String,
        partial: f64,
        est_error: f64,
    },

    /// Argument outside a function's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An empirical estimator has too little data to produce a value.
    #[error("estimation error: {0}")]
    Estimation(String),

    /// I/O failure while reading or writing a field-grid file.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A field-grid file is malformed.
    #[error("format error: {0}")]
    Format(String),
}
