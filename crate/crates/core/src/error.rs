use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("mode count {n} outside supported range 1..={max}")]
    ModeCount { n: usize, max: usize },

    #[error("non-finite value in {what}")]
    NonFinite { what: String },

    #[error("correlation value {value} at index {index} outside [-1, 1]")]
    CorrelationOutOfRange { index: usize, value: f64 },

    #[error("empty displacement list")]
    EmptyDisplacements,

    #[error("truncated Hilbert space dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("cutoff {cutoff} too small (need at least {min})")]
    CutoffTooSmall { cutoff: usize, min: usize },

    #[error("truncation leakage {leakage:e} exceeds tolerance {tolerance:e}")]
    Leakage { leakage: f64, tolerance: f64 },

    #[error("imaginary residual {residual:e} in parity expectation exceeds {tolerance:e}")]
    ImaginaryResidual { residual: f64, tolerance: f64 },

    #[error("oracle unsupported for N = {0} (N >= 5)")]
    OracleUnsupported(usize),

    #[error("{0}")]
    InvalidArgument(String),
}
