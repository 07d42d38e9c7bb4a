use thiserror::Error;

/// Errors produced by the Gaussian calculus, the Fock engine and the protocol.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A scalar argument lies outside the domain of the operation.
    #[error("{name} = {value} is outside the allowed domain {allowed}")]
    Domain {
        name: &'static str,
        value: f64,
        allowed: &'static str,
    },

    /// The state violates the uncertainty relation or a structural invariant.
    #[error("inadmissible state: {0}")]
    Inadmissible(String),

    /// (C, S) with C = 1 has no lossy-channel decomposition.
    #[error("degenerate channel decomposition: C - 1 = {c_minus_one:e}")]
    DegenerateDecomposition { c_minus_one: f64 },

    #[error("division by (near) zero while computing {0}")]
    DivisionByZero(&'static str),

    /// Γ₂ + ΣγΣᵀ is not invertible: the operation/state pair is unphysical.
    #[error("singular matrix in Gaussian CP map")]
    SingularMatrix,

    #[error("cutoff {cutoff} too small: truncation leakage {leakage:e} exceeds bound {bound:e}")]
    CutoffTooSmall {
        cutoff: usize,
        leakage: f64,
        bound: f64,
    },

    /// A conditional operation produced (numerically) zero trace.
    #[error("conditional outcome has zero weight ({weight:e})")]
    ZeroWeight { weight: f64 },

    #[error("symmetry violation: |{element}| = {value:e} exceeds tolerance")]
    SymmetryViolation { element: String, value: f64 },

    #[error("root finder did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// The matching conditions require λ ≥ 1, i.e. no physical Gaussian state.
    #[error("no physical Gaussian state reproduces the requested Fock ratios")]
    Unphysical,

    #[error("no root in bracket; sweep (q, r) = {sweep:?}")]
    NoRootInBracket { sweep: Vec<(f64, f64)> },

    #[error("unsupported Fock level {0}")]
    UnsupportedLevel(usize),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, value: f64, allowed: &'static str) -> Error {
    Error::Domain {
        name,
        value,
        allowed,
    }
}
