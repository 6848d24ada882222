use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("vector must have at least one component")]
    EmptyVector,
    #[error("component {index} is not finite")]
    NonFinite { index: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("sequence must contain at least one sample")]
    EmptySequence,
    #[error("declared bound {0} must be finite and nonnegative")]
    InvalidBound(f64),
    #[error("sample {index} has norm {norm} above the declared bound {bound}")]
    BoundExceeded { index: usize, norm: f64, bound: f64 },
    #[error("window of length {len} starting at {start} does not fit in horizon {horizon}")]
    WindowOutOfRange {
        start: usize,
        len: usize,
        horizon: usize,
    },
    #[error("shift {shift} must be smaller than the horizon {horizon}")]
    ShiftOutOfRange { shift: usize, horizon: usize },
    #[error("maximum window {window} outside the admissible range 1..={max}")]
    MaxWindowOutOfRange { window: usize, max: usize },
    #[error("no block of length {len} fits in horizon {horizon}")]
    NoBlockFits { len: usize, horizon: usize },
    #[error("subadditivity only holds for sliding-mode curves")]
    BlockModeCurve,
    #[error("convex hull audit supports dimension 1 or 2, got {0}")]
    HullDimension(usize),
    #[error("time {time} is not a nonnegative multiple of the step {step}")]
    OffGrid { time: f64, step: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
