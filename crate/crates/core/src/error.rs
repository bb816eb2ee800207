use thiserror::Error;

/// Errors raised by the witness toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("no NPT witness exists for this state (min eigenvalue of the partial transpose {min_eigenvalue:.3e})")]
    NotNpt { min_eigenvalue: f64 },

    #[error("map does not detect this state (min eigenvalue {min_eigenvalue:.3e})")]
    MapDoesNotDetect { min_eigenvalue: f64 },

    #[error("basis is not orthonormal (max Gram deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("singular transformation: {0}")]
    Singular(String),

    #[error("cut {cut}: {reason}")]
    Cut { cut: String, reason: String },

    #[error("witness is negative on the separable oracle (min value {min_value:.3e})")]
    NotAWitness { min_value: f64 },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_err(expected: impl ToString, found: impl ToString) -> Error {
    Error::DimensionMismatch {
        expected: expected.to_string(),
        found: found.to_string(),
    }
}
