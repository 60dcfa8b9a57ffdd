use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate curve: radius {radius} at parameter {parameter}")]
    DegenerateCurve { parameter: f64, radius: f64 },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("curve fit failed: {0}")]
    Fit(String),

    #[error("ill-conditioned system: condition estimate {condition:.3e} exceeds {limit:.1e}")]
    Conditioning { condition: f64, limit: f64 },

    #[error("singular matrix at pivot {0}")]
    Singular(usize),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series truncation failed: {0}")]
    Truncation(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
