use thiserror::Error;

/// Errors raised by the discretization, solvers and harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("function lives on a different mesh or space than expected: {0}")]
    Mismatch(String),

    #[error("singular tridiagonal system: pivot {pivot:e} at row {row}")]
    SingularPivot { row: usize, pivot: f64 },

    #[error("unknown nonlinearity `{0}` (expected zero|sin|cubic|exp)")]
    UnknownNonlinearity(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("Newton did not converge in {iters} iterations (last residual {:e})", history.last().copied().unwrap_or(f64::NAN))]
    NonConvergence { iters: usize, history: Vec<f64> },

    #[error("non-finite value during Newton iteration {iter} (blow-up)")]
    BlowUp { iter: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not enough valid points for a fit: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
