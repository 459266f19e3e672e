use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix dimension must be at least 1")]
    EmptyMatrix,

    #[error("expected {expected} entries for a {dim}x{dim} matrix, got {got}")]
    ShapeMismatch { dim: usize, expected: usize, got: usize },

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error(
        "matrix is not Hermitian: |A[{row}][{col}] - conj(A[{col}][{row}])| = {deviation:e} exceeds {tolerance:e}"
    )]
    NotHermitian {
        row: usize,
        col: usize,
        deviation: f64,
        tolerance: f64,
    },

    #[error("Jacobi diagonalization did not converge within {sweeps} sweeps")]
    IterationLimitExceeded { sweeps: usize },

    #[error("diagonal entry {0} is not strictly positive (unilluminated detector)")]
    ZeroDiagonal(usize),

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("dimension {dim} exceeds the limit of {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("bandwidth must be positive, got {0} eV")]
    NonPositiveBandwidth(f64),

    #[error("invalid spectral model: {0}")]
    InvalidModel(String),

    #[error("invalid detector configuration: {0}")]
    InvalidDetector(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("coherence kernel is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    KernelNotPsd { min_eigenvalue: f64 },

    #[error("index {index} out of range for {dim} points")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("invalid index set: {0}")]
    InvalidIndices(String),

    #[error("detection probability {0} exceeds 1; the detection interval is too coarse for this intensity")]
    ProbabilityOverflow(f64),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("{k} points give too many set partitions (limit {max})")]
    TooManyPartitions { k: usize, max: usize },

    #[error("single-bin detection probability {0} exceeds 0.5; reduce eta*S*dt or the intensity")]
    BinProbabilityTooLarge(f64),

    #[error("sampling kernel spectrum outside [0, 1] (eigenvalue {eigenvalue:e})")]
    SpectrumOutOfRange { eigenvalue: f64 },

    #[error("projection deflation broke down (residual norm {0:e}); grid points are nearly duplicated")]
    DeflationBreakdown(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
