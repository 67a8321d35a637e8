use thiserror::Error;

/// Errors produced by the library and harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A vector argument does not match the decision set's ambient dimension.
    #[error("dimension mismatch: expected {expected} components, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A cost or loss entry is NaN or infinite where a finite value is required.
    #[error("non-finite entry {value} at component {index}")]
    NonFinite { index: usize, value: f64 },

    /// A scalar or structural parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Enumeration of the decision set would exceed the configured cap.
    #[error("decision set has more than {cap} actions; enumeration refused")]
    NotEnumerable { cap: usize },

    /// The estimator state was fed inconsistent data.
    #[error("estimator state error: {0}")]
    EstimatorState(String),

    /// Feedback handed to a policy does not match the played action.
    #[error("feedback protocol violation: {0}")]
    Protocol(String),

    /// A configuration file or CLI flag combination is invalid.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A loss file could not be parsed.
    #[error("loss file {path}: {message}")]
    LossFile { path: String, message: String },

    /// An I/O operation failed.
    #[error("{context}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Checks that every entry of `values` is finite, returning the first offender.
pub(crate) fn check_finite(values: &[f64]) -> Result<()> {
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite { index, value });
        }
    }
    Ok(())
}

/// Checks that `values` has exactly `expected` entries.
pub(crate) fn check_dim(values: &[f64], expected: usize) -> Result<()> {
    if values.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: values.len(),
        });
    }
    Ok(())
}
