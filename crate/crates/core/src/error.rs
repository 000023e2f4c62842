use thiserror::Error;

/// Errors produced by field operations, transforms and verification.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("operation requires a {expected}-dimensional grid, got dimension {found}")]
    Dimension { expected: usize, found: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("value {value} at grid point {index} is not strictly positive")]
    Positivity { index: usize, value: f64 },

    #[error("coefficient is not of conductivity type: compatibility defect {defect:.3e} exceeds {tolerance:.3e}")]
    NotConductivityType { defect: f64, tolerance: f64 },

    #[error("inputs are not a conjugate pair: {what} {defect:.3e} exceeds {tolerance:.3e}")]
    Compatibility {
        what: &'static str,
        defect: f64,
        tolerance: f64,
    },

    #[error("potential omega vanishes at grid point {index}")]
    SingularOmega { index: usize },

    #[error("divisor field vanishes at grid point {index}")]
    ZeroDivisor { index: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("residual signature mismatch: {0}")]
    Signature(String),

    #[error("field file: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
