use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("non-positive density {value} passed to a pressure law")]
    NonPositiveDensity { value: f64 },

    #[error("reconstruction did not converge at grid index {index} after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        index: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("inadmissible state at grid index {index}: {reason}")]
    Inadmissible { index: usize, reason: String },

    #[error("degenerate volume fraction at grid index {index}: min(alpha+, alpha-) = {value:.3e}")]
    DegenerateFraction { index: usize, value: f64 },

    #[error("grid resolution error: {0}")]
    Resolution(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("unsupported request: {0}")]
    Unsupported(String),

    #[error("blow-up at t = {time:.6e}: {reason}")]
    BlowUp { time: f64, reason: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
