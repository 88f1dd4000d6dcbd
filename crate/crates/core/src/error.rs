use thiserror::Error;

pub type Result<T> = std::result::Result<T, QsnError>;

#[derive(Debug, Error)]
pub enum QsnError {
    #[error("dimension {requested} exceeds the configured maximum {limit} (set QSN_MAX_DIM to raise it)")]
    DimensionLimit { requested: usize, limit: usize },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("matrix is not Hermitian (max |A - A^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("partial trace would discard every subsystem")]
    EmptyKeepSet,

    #[error("generators of sensor {sensor} do not commute (residual {residual:e}); use the local-purification path")]
    NonCommuting { sensor: usize, residual: f64 },

    #[error("allocation entry {index} is not an integer (N v_k / |v|_1 = {value})")]
    NonIntegerAllocation { index: usize, value: f64 },

    #[error("matrix is singular: {0}")]
    Singular(String),

    #[error("matrix is not orthogonal (max |M M^T - I| = {deviation:e})")]
    NotOrthogonal { deviation: f64 },

    #[error("invalid weight matrix: {0}")]
    InvalidWeights(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid linear functional: {0}")]
    InvalidFunctional(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
