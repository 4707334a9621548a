use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rank {rank} out of range 1..={max}")]
    RankOutOfRange { rank: usize, max: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid matrix dimensions {rows}x{cols}")]
    InvalidDimensions { rows: usize, cols: usize },
    #[error("weight {value} at index {index} must be positive and finite")]
    InvalidWeight { index: usize, value: f64 },
    #[error("cluster count {clusters} out of range 1..={max}")]
    ClusterCountOutOfRange { clusters: usize, max: usize },
    #[error("cluster {0} is empty")]
    EmptyCluster(usize),
    #[error("budget of {budget} parameters is below the rank-1 floor of {floor}")]
    InfeasibleBudget { budget: u64, floor: u64 },
    #[error("pruning threshold {0} must be a nonnegative number")]
    NegativeThreshold(f64),
    #[error("bit width {0} out of range 1..=16")]
    BitsOutOfRange(u32),
    #[error("index {index} out of range for {len} rows")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },
    #[error("unsupported format version {0}")]
    BadVersion(u32),
    #[error("unknown dtype code {0}")]
    BadDtype(u8),
    #[error("truncated file while reading {0}")]
    Truncated(&'static str),
    #[error("corrupt file: {0}")]
    Corrupt(String),
    #[error("frequency file has {actual} lines, expected {expected}")]
    FrequencyCountMismatch { expected: usize, actual: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    /// Process exit code used by the command line tool. Every error class maps
    /// to its own code; 2 is reserved for usage errors.
    pub fn code(&self) -> i32 {
        match self {
            Error::RankOutOfRange { .. } => 10,
            Error::NonFinite { .. } => 11,
            Error::ShapeMismatch { .. } => 12,
            Error::DimensionMismatch { .. } => 13,
            Error::InvalidDimensions { .. } => 14,
            Error::InvalidWeight { .. } => 15,
            Error::ClusterCountOutOfRange { .. } => 16,
            Error::EmptyCluster(_) => 17,
            Error::InfeasibleBudget { .. } => 18,
            Error::NegativeThreshold(_) => 19,
            Error::BitsOutOfRange(_) => 20,
            Error::IndexOutOfRange { .. } => 21,
            Error::InvalidConfig(_) => 22,
            Error::InvalidPartition(_) => 23,
            Error::Io(_) => 30,
            Error::BadMagic { .. } => 31,
            Error::BadVersion(_) => 32,
            Error::BadDtype(_) => 33,
            Error::Truncated(_) => 34,
            Error::Corrupt(_) => 35,
            Error::FrequencyCountMismatch { .. } => 36,
            Error::Parse { .. } => 37,
        }
    }
}
