use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid site index {site} for a {n}-qubit system (sites are 1-based)")]
    InvalidSite { site: usize, n: usize },

    #[error("non-finite value: {0}")]
    NonFinite(&'static str),

    #[error("operator is not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),

    #[error("operator is not unitary (residual {0:.3e})")]
    NotUnitary(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("vector has zero norm")]
    ZeroNorm,

    #[error("operator is not normalized: ||O||_2 = {0}")]
    NotNormalized(f64),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("no rational eigenvalues found, revival period T is undefined")]
    NoRationalEigenvalues,

    #[error("revival period T is undefined for this classification")]
    PeriodUndefined,

    #[error("rational eigenvalue {rational} and irrational eigenvalue {irrational} are degenerate")]
    BoundaryDegeneracy { rational: usize, irrational: usize },

    #[error("spectral assumption violated: {0}")]
    AssumptionViolation(String),

    #[error("state is not free: {0}")]
    NotFree(String),

    #[error("invalid free-unitary parameters: {0}")]
    InvalidFreeUnitary(String),

    #[error("enumeration of {0} terms exceeds the size guard")]
    Infeasible(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("linear algebra failure: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
