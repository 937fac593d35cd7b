use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows} rows, {cols} columns")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is empty")]
    EmptyMatrix,
    #[error("value {value} at ({row}, {col}) is outside [0, 1]")]
    ValueOutOfRange { row: usize, col: usize, value: f64 },
    #[error("matrix is not symmetric at row {row}, column {col}: |v[{row}][{col}] - v[{col}][{row}]| = {diff:e}")]
    Asymmetric { row: usize, col: usize, diff: f64 },
    #[error("invalid segmentation vector: {0}")]
    InvalidSegmentation(String),
    #[error("probability {value} at index {index} is outside [0, 1]")]
    ProbabilityOutOfRange { index: usize, value: f64 },

    #[error("throughput must be even and at least 2, got {0}")]
    InvalidThroughput(usize),
    #[error("matrix size must be at least 1")]
    EmptyInput,
    #[error("layout mismatch: expected {expected}, found {found}")]
    LayoutMismatch { expected: usize, found: usize },

    #[error("scaling parameters violate constraints: {0}")]
    ParamConstraintViolated(String),
    #[error("input value {0} is outside [0, 1]")]
    InputOutOfRange(f64),

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("target vector is not binary at record {record}, position {position}")]
    NonBinaryTarget { record: usize, position: usize },
    #[error("regularization strength must be finite and non-negative, got {0}")]
    InvalidLambda(f64),
    #[error("normal equations are singular (pivot {pivot:e} at column {column})")]
    SingularSystem { column: usize, pivot: f64 },
    #[error("unsupported model format version {found} (expected {expected})")]
    FormatVersionMismatch { expected: u32, found: u32 },
    #[error("malformed model file: {0}")]
    MalformedModel(String),

    #[error("threshold must lie in [0, 1], got {0}")]
    InvalidThreshold(f64),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("reference values have zero variance")]
    ZeroVariance,
    #[error("window size {k} must be smaller than sequence length {n}")]
    DegenerateWindow { k: usize, n: usize },
    #[error("metric grid is empty or ragged")]
    EmptyGrid,

    #[error("no model available for throughput {0}")]
    MissingModel(usize),
    #[error("validation set is empty")]
    EmptyValidation,
    #[error("no tuning candidates to select from")]
    NoCandidates,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
