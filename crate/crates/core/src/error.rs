use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not symmetric (relative asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("matrix is not Hermitian (relative deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("singular input: smallest singular value {sigma_min:.3e} below tolerance {tol:.3e}")]
    SingularInput { sigma_min: f64, tol: f64 },

    #[error("numerical rank is ambiguous: gap ratio {gap:.3e} below {required:.3e}")]
    RankAmbiguous { gap: f64, required: f64 },

    #[error("eigenvalue clusters are ambiguous: {0}")]
    EigenvalueClusterAmbiguous(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("odd multiplicity: {0}")]
    OddMultiplicity(String),

    #[error("internal consistency check failed: {0}")]
    InternalCheck(String),
}

pub type Result<T> = std::result::Result<T, Error>;
