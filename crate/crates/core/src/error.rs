use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("not unitary (defect {0:.3e})")]
    NotUnitary(f64),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate subsystem label `{0}`")]
    LabelCollision(String),

    #[error("invalid cut: {0}")]
    InvalidCut(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("total dimension {0} exceeds the supported maximum of {1}")]
    TooLarge(usize, usize),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("malformed state file: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
