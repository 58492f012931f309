use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("box has non-finite coordinate: {0:?}")]
    NonFinite([f64; 4]),
    #[error("box has zero or negative area: {0:?}")]
    Degenerate([f64; 4]),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssignmentError {
    #[error("cost matrix must have at least one row and one column (got {rows}x{cols})")]
    Empty { rows: usize, cols: usize },
    #[error("cost matrix has {got} values, expected {rows}x{cols}")]
    Shape { rows: usize, cols: usize, got: usize },
    #[error("non-finite cost at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("brute-force assignment refused: smaller side {0} exceeds 9")]
    TooLarge(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum D3Error {
    #[error("lower bound must lie in (0, 2), got {0}")]
    LowerBound(f64),
    #[error("decontamination requires the repulsive loss mode")]
    LiteralMode,
    #[error("step size must be positive and finite, got {0}")]
    StepSize(f64),
    #[error("box list is empty")]
    NoBoxes,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum MotError {
    #[error("line {line}: {msg}")]
    Malformed { line: u64, msg: String },
    #[error("line {line}: non-positive box size (w={w}, h={h})")]
    NonPositiveSize { line: u64, w: f64, h: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("ground truth is empty")]
    EmptyGroundTruth,
    #[error("prediction frame {frame} lies beyond the last ground-truth frame {last}")]
    FrameMismatch { frame: u32, last: u32 },
    #[error("frame {frame}: id {id} appears more than once in {source_name}")]
    DuplicateId { frame: u32, id: i64, source_name: &'static str },
    #[error("invalid box in {source_name} at frame {frame}: {err}")]
    BadBox { frame: u32, source_name: &'static str, err: GeometryError },
}
