use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid group specification: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: expected {expected} factors, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("shape mismatch: expected length {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("coordinate out of range in factor {factor}: {detail}")]
    OutOfRange { factor: usize, detail: String },

    #[error("point is not on the sampling grid: {0}")]
    OffGrid(String),

    #[error("dual point {0} lies outside the window")]
    OutsideWindow(String),

    #[error("crossed-product support escapes the window: {0}")]
    WindowEscape(String),

    #[error("support radius {support} aliases on a grid of size {grid} with window radius {window}")]
    Aliasing { support: i64, grid: usize, window: i64 },

    #[error("operator shape mismatch: {0}")]
    OperatorShape(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
