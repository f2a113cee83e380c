//! Crate-wide error type.

/// Errors surfaced by construction, integration and solver routines.
///
/// Construction failures are loud on purpose: a parameter set that does not
/// satisfy its defining algebraic relations must never propagate into the
/// numerics.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Parameter construction or validation failed (exponent quadratic,
    /// λ-radicand, weight window, grid sizes, ...).
    #[error("invalid parameters: {0}")]
    Params(String),

    /// Adaptive ODE integration failed (step-size underflow, step budget).
    #[error("ODE integration failed: {0}")]
    Ode(String),

    /// A profile or sampled field violated one of its invariants.
    #[error("invalid field data: {0}")]
    Field(String),

    /// An exact polynomial identity check failed; the message carries the
    /// offending expanded polynomial.
    #[error("polynomial identity violated: {0}")]
    Identity(String),

    /// A numeric sign/ordering check failed with a margin report.
    #[error("sign check failed: {0}")]
    Sign(String),

    /// The sparse linear solver did not reach its residual target.
    #[error("linear solve failed: {0}")]
    Linear(String),

    /// The damped Newton iteration stagnated; carries the step history.
    #[error("nonlinear solve failed: {0}")]
    Nonlinear(String),

    /// Dense factorization / eigendecomposition failure.
    #[error("dense linear algebra failed: {0}")]
    Dense(String),
}

pub type Result<T> = std::result::Result<T, Error>;
