use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// The spline fails a shape requirement at `y`.
    #[error("invalid spline shape at y = {y}: {reason}")]
    InvalidShape { y: f64, reason: String },

    #[error("spline construction failed: {0}")]
    Construction(String),

    #[error("did not converge: {0}")]
    Convergence(String),

    /// No grid point accepts `x`, or the accepted set reaches the edge of the grid.
    #[error("x = {x} is outside the range covered by the acceptance grid")]
    OutOfGrid { x: f64 },

    #[error("quadratic subproblem failed: {0}")]
    Subproblem(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
