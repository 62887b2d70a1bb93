use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("operands live on different spaces: {0} vs {1}")]
    SpaceMismatch(String, String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NonHermitian(f64),

    #[error("truncation residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    Truncation { residual: f64, tolerance: f64 },

    #[error("integration failure at t = {t_ms} ms: {reason}")]
    Integration { t_ms: f64, reason: String },

    #[error("density matrix positivity violation at t = {t_ms} ms (min eigenvalue {min_eig:.3e})")]
    Positivity { t_ms: f64, min_eig: f64 },

    #[error("postselection removed the entire state (survival probability {0:.3e})")]
    EmptyProjection(f64),

    #[error("fit failure: {0}")]
    Fit(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
