use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported spatial dimension {0} (expected 1 or 2)")]
    UnsupportedDimension(usize),

    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },

    #[error("direction must have unit length, |nu| = {0}")]
    NotUnit(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("field `{field}` has {got} entries, grid expects {expected}")]
    ShapeMismatch {
        field: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("time step {dt} violates {which} limit {limit}")]
    Cfl {
        which: &'static str,
        dt: f64,
        limit: f64,
    },

    #[error("non-finite value in `{field}` at step {step}, index {index}")]
    NonFinite {
        field: &'static str,
        step: usize,
        index: usize,
    },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("incompatible input: {0}")]
    Incompatible(String),

    #[error("config error in [{section}] {key}: {message}")]
    Config {
        section: String,
        key: String,
        message: String,
    },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(section: &str, key: &str, message: impl Into<String>) -> Self {
        Error::Config {
            section: section.to_string(),
            key: key.to_string(),
            message: message.into(),
        }
    }

    /// True for errors raised by the numerical core after input validation passed.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonFinite { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive { name, value })
    }
}

pub(crate) fn ensure_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && !value.is_nan() {
        Ok(())
    } else {
        Err(Error::Negative { name, value })
    }
}
