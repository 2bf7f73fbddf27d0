use thiserror::Error;

/// Errors surfaced by the numerical kernels and certifiers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimensions(String),

    #[error("matrix is not Hermitian within tolerance (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("operator is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("trace deviates from one by {0:.3e}")]
    TraceNotOne(f64),

    #[error("vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("basis is not orthonormal (max Gram deviation {0:.3e})")]
    NotOrthonormal(f64),

    #[error("operator is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("span collapsed to the empty space")]
    EmptySpace,

    #[error("invalid parameter: {0}")]
    Domain(String),

    #[error("numerically singular reduction: {0}")]
    Singular(String),

    #[error("search budget exhausted: {0}")]
    SearchFailed(String),

    #[error("precondition not met: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
