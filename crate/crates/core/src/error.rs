use thiserror::Error;

/// Errors surfaced by model construction, estimation, and experiment loops.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A shape constraint (monotonicity, simplex membership, dimensions) is violated.
    #[error("shape constraint violated: {0}")]
    Shape(String),

    /// A model component fails validation (e.g. a covariance that is not PSD).
    #[error("invalid model: {0}")]
    Model(String),

    /// A scalar falls outside its admissible range.
    #[error("value out of range: {0}")]
    Range(String),

    /// A linear system is too ill-conditioned to invert reliably.
    #[error("ill-conditioned system: smallest singular value {sigma_min:.3e} below {tol:.3e}")]
    IllConditioned { sigma_min: f64, tol: f64 },

    /// A parametric fit collapsed; it has no usable quantile scale.
    #[error("degenerate parametric fit: nonpositive slope, no usable scale")]
    DegenerateModel,

    /// An iterative routine failed to converge or produced non-finite values.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
