use thiserror::Error;

/// Errors reported by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("starting vector has zero norm")]
    ZeroStartVector,

    #[error("breakdown: subdiagonal entry {index} vanishes")]
    BreakdownEncountered { index: usize },

    #[error("subdiagonal entry must be positive, got {0}")]
    NonpositiveSubdiagonal(f64),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("shifted matrix A - zI is numerically singular at z = {re}{im:+}i")]
    SingularShift { re: f64, im: f64 },

    #[error("operation requires a {expected} operator")]
    SpecializationMismatch { expected: &'static str },

    #[error("coefficient matrix V^*M is singular (relative pivot {0:e})")]
    SingularLink(f64),

    #[error("operator is not unitary (defect {0:e})")]
    NotUnitary(f64),

    #[error("outlier {re}{im:+}i lies on the circle")]
    OutlierOnCircle { re: f64, im: f64 },

    #[error("invalid interval: alpha = {alpha} must be below beta = {beta}")]
    InvalidInterval { alpha: f64, beta: f64 },

    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),

    #[error("matrix is numerically singular")]
    Singular,

    #[error("resampling failed after {0} attempts")]
    ResamplingExhausted(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
