//! Error type shared by every module, with stable machine-readable codes.

use thiserror::Error;

/// Library-wide error enum. Each variant carries a stable code (see
/// [`Error::code`]) so front ends can dispatch without string matching.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input contains non-finite entries")]
    NonFiniteInput,
    #[error("matrix is not positive semidefinite (lambda_min = {lambda_min:.3e})")]
    NotPsd { lambda_min: f64 },
    #[error("matrix is not positive definite (lambda_min = {lambda_min:.3e})")]
    NotPd { lambda_min: f64 },
    #[error("channel image lost positive definiteness (lambda_min = {lambda_min:.3e})")]
    NotPositive { lambda_min: f64 },
    #[error("channel is not unital")]
    NotUnital,
    #[error("scaling factor failed the unitarity gate (defect = {defect:.3e})")]
    NotUnitary { defect: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix has a zero column")]
    ZeroColumn,
    #[error("matrix has a zero row")]
    ZeroRow,
    #[error("trace is not positive ({trace:.3e})")]
    ZeroTrace { trace: f64 },
    #[error("row/column target sums differ by {gap:.3e}")]
    TargetMismatch { gap: f64 },
    #[error("matrix is not column-stochastic (max column defect = {defect:.3e})")]
    NotStochastic { defect: f64 },
    #[error("spectral band (a = {a}, b = {b}) is invalid for dimension {n}")]
    BandInvalid { a: f64, b: f64, n: usize },
    #[error("solution is not converged")]
    NotConverged,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
}

impl Error {
    /// Stable machine-readable code for this error.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonFiniteInput => "NON_FINITE_INPUT",
            Error::NotPsd { .. } => "NOT_PSD",
            Error::NotPd { .. } => "NOT_PD",
            Error::NotPositive { .. } => "NOT_POSITIVE",
            Error::NotUnital => "NOT_UNITAL",
            Error::NotUnitary { .. } => "NOT_UNITARY",
            Error::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            Error::ZeroColumn => "ZERO_COLUMN",
            Error::ZeroRow => "ZERO_ROW",
            Error::ZeroTrace { .. } => "ZERO_TRACE",
            Error::TargetMismatch { .. } => "TARGET_MISMATCH",
            Error::NotStochastic { .. } => "NOT_STOCHASTIC",
            Error::BandInvalid { .. } => "BAND_INVALID",
            Error::NotConverged => "NOT_CONVERGED",
            Error::Parse(_) => "PARSE_ERROR",
            Error::Validation(_) => "VALIDATION_ERROR",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
