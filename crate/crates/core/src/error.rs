use thiserror::Error;

/// Errors raised by field construction, solving and editing.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GfcError {
    #[error("invalid dimensions {height}x{width}: {reason}")]
    InvalidDimensions {
        height: usize,
        width: usize,
        reason: &'static str,
    },
    #[error("field of {height}x{width} is too small to crop a pad of {pad}")]
    DimensionTooSmall {
        height: usize,
        width: usize,
        pad: usize,
    },
    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("stamp of {stamp:?} does not fit in a {grid:?} grid")]
    StampTooLarge {
        stamp: (usize, usize),
        grid: (usize, usize),
    },
    #[error("degenerate solution: standard deviation {std} is too small to rescale")]
    DegenerateSolution { std: f64 },
    #[error("dense solve limited to {limit} pixels, got {pixels}")]
    SizeGuard { pixels: usize, limit: usize },
    #[error("zero-norm input: {0}")]
    ZeroNorm(&'static str),
    #[error("blend source does not cover mask pixel ({row}, {col})")]
    Coverage { row: usize, col: usize },
    #[error("csv output failed: {0}")]
    Csv(String),
}

pub type Result<T, E = GfcError> = std::result::Result<T, E>;

impl GfcError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        GfcError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
