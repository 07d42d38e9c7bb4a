use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by all layers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Algebraic identities (ε invariance, roundtrips, Hermiticity).
    pub identity: f64,
    /// Slack allowed on eigenvalues that must be non-negative.
    pub positivity: f64,
    /// Maximum population allowed in the top Fock level of any mode.
    pub leakage_bound: f64,
    /// Traces below this are treated as an impossible outcome.
    pub weight_floor: f64,
    /// Elements of σ that must vanish for symmetric states.
    pub symmetry: f64,
    /// Residual target for the root finders.
    pub root: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-10,
            positivity: 1e-9,
            leakage_bound: 1e-4,
            weight_floor: 1e-30,
            symmetry: 1e-8,
            root: 1e-10,
        }
    }
}
