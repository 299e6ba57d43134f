//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong across the crate, from malformed operator
/// input up to failed numeric procedures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("matrix is not symmetric (relative asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not skew-symmetric (relative defect {defect:.3e})")]
    NotSkew { defect: f64 },

    #[error("matrix is singular")]
    Singular,

    #[error("operator list is empty")]
    EmptyList,

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("metric is not positive definite")]
    MetricNotPositiveDefinite,

    #[error("Jacobi identity violated (residual {residual:.3e})")]
    JacobiIdentity { residual: f64 },

    #[error("invalid bracket data: {0}")]
    InvalidBracket(String),

    #[error("vector must be unit length, got norm {norm}")]
    NotUnit { norm: f64 },

    #[error("numeric integration diverged near t = {t}")]
    Diverged { t: f64 },

    #[error("operator curve has osculating rank {rank}, expected 2")]
    RankNotTwo { rank: usize },

    #[error("curve samples not equidistant from center (relative spread {spread:.3e})")]
    NotACircle { spread: f64 },

    #[error("{0}")]
    Domain(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
