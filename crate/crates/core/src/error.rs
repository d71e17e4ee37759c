use thiserror::Error;

/// Errors raised by the grid model, the frame algorithms and the construction pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("alignment error: {0}")]
    Alignment(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("grid specs do not match")]
    SpecMismatch,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("scale error: {0}")]
    Scale(String),
    #[error("sequence exhausted after {scanned} terms: filled {filled} of {required} ladder slots")]
    Unbounded {
        scanned: usize,
        filled: usize,
        required: usize,
    },
    #[error("inversion error: {reason} (condition estimate {condition:e})")]
    Inversion { reason: String, condition: f64 },
    #[error("auxiliary system precondition failed: {0}")]
    Auxiliary(String),
    #[error("invalid disjointness certificate: {0}")]
    Certificate(String),
    #[error("function is not in the working span (relative residual {residual:e})")]
    NotInSpan { residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
