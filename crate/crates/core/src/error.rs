use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the domain of the generator or family.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller-side precondition does not hold (bad sizes, empty inputs, ...).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The sample set cannot support a strictly convex generator.
    #[error("degenerate sample: {0}")]
    Degenerate(String),

    /// Too few variates for the Hessian to have full rank.
    #[error("rank deficient: {m} variates for dimension {dim}")]
    RankDeficient { m: usize, dim: usize },

    /// A Hessian failed the symmetric positive definite check.
    #[error("Hessian is not symmetric positive definite: {0}")]
    NotSpd(String),

    /// A cached or evaluated quantity was not finite.
    #[error("non-finite value at variate {index} (x = {x}): {what}")]
    NonFinite { index: usize, x: f64, what: String },

    /// Gradient inversion did not reach the requested residual.
    #[error("no solution: gradient inversion stopped with residual {residual:e} ({reason})")]
    NoSolution { residual: f64, reason: String },

    /// Numerical quadrature did not converge.
    #[error("quadrature failed: {0}")]
    Quadrature(String),

    /// Parts handed to an aggregation do not belong together.
    #[error("mismatch: {0}")]
    Mismatch(String),

    /// Clustering could not proceed.
    #[error("clustering failed: {0}")]
    Clustering(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line tool: 2 for configuration and
    /// precondition problems, 3 for domain and numerical errors, 4 for
    /// algorithm failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Precondition(_)
            | Error::RankDeficient { .. }
            | Error::Mismatch(_)
            | Error::Io(_)
            | Error::Json(_) => 2,
            Error::Domain(_)
            | Error::Degenerate(_)
            | Error::NotSpd(_)
            | Error::NonFinite { .. }
            | Error::Quadrature(_) => 3,
            Error::NoSolution { .. } | Error::Clustering(_) => 4,
        }
    }
}
