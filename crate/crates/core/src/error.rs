use thiserror::Error;

/// Errors raised by the stability computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: estimate {value:e} with error {error:e} after {evals} evaluations")]
    NonConvergence { value: f64, error: f64, evals: usize },

    #[error("no sign change of Lambda_beta - 1 found for beta = {beta} on ({lo}, {hi})")]
    NoBracket { beta: f64, lo: f64, hi: f64 },

    #[error("closed-form reduction disagrees with Monte Carlo: {closed_form:e} vs {monte_carlo:e} +- {std_err:e}")]
    DerivationMismatch { closed_form: f64, monte_carlo: f64, std_err: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
