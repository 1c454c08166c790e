use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix is not Hermitian: anti-Hermitian residual {residual:.3e} exceeds {limit:.3e}")]
    NotHermitian { residual: f64, limit: f64 },

    #[error("eigenvalue {eigenvalue} lies outside the domain of {function}")]
    Domain { function: String, eigenvalue: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("product space has {outcomes} outcomes, above the enumeration budget of {budget}")]
    Budget { outcomes: u128, budget: usize },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
