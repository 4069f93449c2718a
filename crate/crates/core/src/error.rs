//! Error type shared by all modules.

use thiserror::Error;

/// Errors surfaced by the library. Diagnostic payloads are `f64` regardless
/// of the working scalar type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported dimension n={n}: {detail}")]
    UnsupportedDimension { n: usize, detail: &'static str },

    /// The exponent q sits inside the guard band around an even integer,
    /// where the eigenvalue formula degenerates.
    #[error("excluded exponent q={q}: within {guard:e} of an even integer")]
    ExcludedExponent { q: f64, guard: f64 },

    /// The smoothness hypothesis 2r > n + q does not hold.
    #[error("hypothesis violation: need 2r > n + q, got r={r}, n={n}, q={q}")]
    HypothesisViolation { r: u32, n: usize, q: f64 },

    #[error("grid too coarse: expansion to degree {max_degree} needs exact degree >= {needed}, grid provides {got}")]
    ResolutionTooCoarse {
        max_degree: usize,
        needed: usize,
        got: usize,
    },

    /// An operation required even coefficients but odd-degree content was present.
    #[error("coefficients are not even: odd-degree mass {magnitude:e} exceeds tolerance")]
    NotEven { magnitude: f64 },

    /// Quadrature refinement stopped before reaching the requested tolerance.
    /// The achieved estimate is reported so the caller can decide.
    #[error(
        "accuracy not reached: required {required:e}, achieved {achieved:e} (estimate {estimate})"
    )]
    Accuracy {
        required: f64,
        achieved: f64,
        estimate: f64,
    },

    #[error("range error: {0}")]
    Range(String),

    #[error("eigenvalue conditioning: |lambda_{m}| = {magnitude:e} is below the safe inversion threshold")]
    Conditioning { m: usize, magnitude: f64 },

    #[error("invalid quadrature rule: {0}")]
    InvalidRule(String),

    #[error("no feasible lambda found above {lambda_min:e}")]
    Infeasible { lambda_min: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
