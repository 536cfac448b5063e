//! Error taxonomy shared by all modules.

use num_complex::Complex64;

/// Crate-wide error type.
///
/// The variants mirror the failure classes of the numerical constructions:
/// invalid parameters, arguments too close to a theta zero, disagreement
/// between two mandatory computation routes, and the various degenerate
/// situations of the curve solvers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid input or context parameters (non-convergent τ, resonant η, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// Argument outside an operation's domain (bad index, zero polynomial, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// An argument fell within `pole_guard` of a θ₁ zero.
    #[error("pole error: argument {arg} is within {dist:.3e} of the theta1 zero lattice")]
    Pole { arg: Complex64, dist: f64 },

    /// Two mandatory computation routes disagree, or a self-check failed.
    #[error("internal consistency error: {0}")]
    Consistency(String),

    /// A numerical limit (Richardson extrapolation) did not stabilize.
    #[error("numerical limit error: {0}")]
    NumericalLimit(String),

    /// Polynomial interpolation did not reproduce the evaluator at fresh points.
    #[error("degree mismatch error: {0}")]
    DegreeMismatch(String),

    /// The linear system over a fibre point has no near-null direction.
    #[error("degenerate fibre error: {0}")]
    DegenerateFibre(String),

    /// Asymptotic convergence laws near the infinite points failed.
    #[error("asymptotics error: {0}")]
    Asymptotics(String),

    /// Operation not defined for these parameters (e.g. ε at ℓ = 1).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A normalizing value vanished (Ψ(ℓη) ≈ 0 in Q-value computation).
    #[error("normalization error: {0}")]
    Normalization(String),

    /// Randomized construction failed after the retry budget (basis rank, sampling).
    #[error("construction error: {0}")]
    Construction(String),

    /// A matrix inversion exceeded the allowed condition number.
    #[error("conditioning error: {0}")]
    Conditioning(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
