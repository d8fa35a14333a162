//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("syntax error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("unknown builtin integrand '{0}'")]
    UnknownBuiltin(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("pole encountered: {0}")]
    Pole(String),

    /// Quadrature hit integrand poles; offending node pairs are reported,
    /// capped at 16 with a total count.
    #[error("{total} pole(s) encountered during quadrature, first at node pairs {pairs:?}")]
    PolesInQuadrature {
        pairs: Vec<(usize, usize)>,
        total: usize,
    },

    #[error("integrand is not smooth in w: {0}")]
    NonSmoothInW(String),

    #[error("integrand is not pairwise symmetric (declare or verify symmetry first)")]
    AsymmetricIntegrand,

    #[error("integrand depends on x or y; the homogeneous-growth check requires f(w,z)")]
    NonHomogeneous,

    #[error(
        "mean of the z-minimized second derivative is negative ({mean:.6e} at x index {x_index}, \
         w index {w_index}); the profile functions are not convex and no separately convex \
         decomposition exists"
    )]
    PhiNonConvex {
        x_index: usize,
        w_index: usize,
        mean: f64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("cell set has zero measure; coverage fraction is undefined")]
    EmptyCellSet,

    #[error("point lies on a cube boundary (measure-zero set); membership is undefined there")]
    BoundaryPoint,

    #[error("malformed CSV: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
