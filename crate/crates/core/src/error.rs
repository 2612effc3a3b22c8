use thiserror::Error;

/// Errors raised by the algebra, certification, solver and oracle layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Cyclic Jacobi failed to reduce the off-diagonal part.
    #[error("eigen solver did not converge after {sweeps} sweeps (off-diagonal residual {off_diagonal:e})")]
    NonConvergence { sweeps: usize, off_diagonal: f64 },

    /// An iterative method stopped before reaching its tolerance.
    #[error("numerical failure in {stage}: {reason} (achieved residual {residual:e})")]
    Numerical {
        stage: String,
        reason: String,
        residual: f64,
    },

    /// The grid cannot support the stencils required on the domain.
    #[error("discretization error: {0}")]
    Discretization(String),

    /// A transform-chain premise fails at a sampled point.
    #[error("chain link {link} violates its premise at x = {point:e}: {reason}")]
    ChainPremise {
        link: usize,
        point: f64,
        reason: String,
    },

    /// Malformed configuration or expression text.
    #[error("config error: {0}")]
    Config(String),

    /// Invariant breach inside the library; never expected on valid input.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
