use thiserror::Error;

pub type Result<T> = std::result::Result<T, DgError>;

#[derive(Debug, Error)]
pub enum DgError {
    #[error("argument {x} outside the reference interval [-1, 1]")]
    Domain { x: f64 },

    #[error("{what} = {value} out of range [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("inadmissible state (rho = {rho}, pressure = {pressure})")]
    InadmissibleState { rho: f64, pressure: f64 },

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value detected at step {step}, stage {stage}")]
    BlowUp { step: usize, stage: usize },

    #[error("vacuum generated by the Riemann data")]
    Vacuum,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
