use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("structure constants: pair ({0}, {1}) given more than once")]
    DuplicatePair(usize, usize),
    #[error("structure constants: pair ({i}, {j}) invalid for n = {n}")]
    PairOutOfRange { i: usize, j: usize, n: usize },
    #[error("at least one isometry is required")]
    EmptyTuple,
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("window of {rows} x {cols} entries exceeds the materialization budget of {budget}")]
    WindowTooLarge { rows: usize, cols: usize, budget: usize },
    #[error("structure constants must match: z_{i}{j} differs ({left} vs {right})")]
    ConstantsMismatch { i: usize, j: usize, left: String, right: String },
    #[error("wandering data invalid: {0}")]
    InvalidWanderingData(String),
    #[error("clock-shift data needs dimension divisible by {required}, got {got}")]
    DimensionNotDivisible { required: i64, got: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("index set mismatch: {0} vs {1}")]
    SectorMismatch(String, String),
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
}
