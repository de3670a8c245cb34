use thiserror::Error;

/// Errors raised by the numerical, geometric and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
    #[error("quadrature did not converge: best estimate {estimate:e}, estimated error {error:e}")]
    Convergence { estimate: f64, error: f64 },

    /// Fluid switching consumes the whole estimation window.
    #[error("infeasible frame: switching needs {switching_uses:.1} channel uses but only {estimation_uses} are reserved for estimation")]
    InfeasibleFrame {
        switching_uses: f64,
        estimation_uses: u64,
    },

    /// The frame cannot support a single pilot per port, so no skip count helps.
    #[error("infeasible skip design: per-port pilot budget {budget:e} is not positive")]
    InfeasibleSkip { budget: f64 },

    /// A configuration invariant is violated.
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
