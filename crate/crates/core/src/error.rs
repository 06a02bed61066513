//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the simulator and analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument fell outside its documented domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration failed validation.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An input stream violated a time-ordering contract.
    #[error("input stream not time-ordered: {0}")]
    UnorderedInput(String),

    /// Accidental-window calibration is undefined (no singles on a detector).
    #[error("accidental calibration undefined: {0}")]
    CalibrationUndefined(String),

    /// The sinusoid fit could not be performed.
    #[error("fit error: {0}")]
    Fit(String),

    /// A derived statistic is undefined for the given inputs.
    #[error("undefined statistic: {0}")]
    Undefined(String),

    /// A file could not be parsed in one of the columnar text formats.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
