use thiserror::Error;

/// Errors produced by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the routine.
    #[error("domain error: {0}")]
    Domain(String),

    /// The Gamma function was asked to evaluate at one of its poles.
    #[error("Gamma function pole at x = {0}")]
    GammaPole(f64),

    /// A kernel was evaluated on (or numerically at) its diagonal.
    #[error("kernel evaluated on the diagonal (|x - y| = {distance:e})")]
    DiagonalSingularity { distance: f64 },

    /// A field lacks the growth class an operator requires.
    #[error("integrability error: {0}")]
    Integrability(String),

    /// An improper integral does not converge.
    #[error("divergent integral: {0}")]
    Divergence(String),

    /// Adaptive quadrature or extrapolation stopped before reaching its tolerance.
    #[error("accuracy failure: best estimate {estimate} with error bound {error_bound:e} ({context})")]
    AccuracyFailure {
        estimate: f64,
        error_bound: f64,
        context: String,
    },

    /// The request is outside what is implemented (dimension, order, region).
    #[error("unsupported: {0}")]
    Capability(String),

    /// A dense linear solve failed.
    #[error("singular system: {0}")]
    Singular(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn capability(msg: impl Into<String>) -> Self {
        Error::Capability(msg.into())
    }

    pub(crate) fn integrability(msg: impl Into<String>) -> Self {
        Error::Integrability(msg.into())
    }
}
