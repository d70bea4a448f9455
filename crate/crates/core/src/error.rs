use thiserror::Error;

/// Errors produced by the medax pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("empty set K")]
    EmptySet,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("field value is not finite at index {index}")]
    NonFinite { index: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("convex envelope did not converge after {iters} sweeps (residual {residual:e})")]
    NoConvergence { iters: usize, residual: f64 },

    #[error("border-invalid: locality window of radius {radius} around ({x}, {y}) leaves the grid")]
    BorderInvalid { x: f64, y: f64, radius: f64 },

    #[error("branch gap: {shape} has no closed-form branch covering ({x}, {y})")]
    BranchGap { shape: &'static str, x: f64, y: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("negative medial axis value {value:e} at index {index}")]
    NegativeMap { index: usize, value: f64 },

    #[error("mask has no interior cells")]
    NoInterior,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
