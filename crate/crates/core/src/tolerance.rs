use serde::{Deserialize, Serialize};

/// Residual thresholds used across the analyses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Lie-algebra axiom residuals, metric invariance, abelian tests.
    pub eps_struct: f64,
    /// Rank, subspace membership and feasibility decisions.
    pub eps_rank: f64,
    /// Constant-length verdicts for Killing fields.
    pub eps_len: f64,
}

impl Tolerances {
    pub const DEFAULT_EPS_STRUCT: f64 = 1e-10;
    pub const DEFAULT_EPS_RANK: f64 = 1e-9;
    pub const DEFAULT_EPS_LEN: f64 = 1e-8;
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eps_struct: Self::DEFAULT_EPS_STRUCT,
            eps_rank: Self::DEFAULT_EPS_RANK,
            eps_len: Self::DEFAULT_EPS_LEN,
        }
    }
}
