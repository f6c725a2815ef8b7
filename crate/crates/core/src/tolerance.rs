//! Numerical tolerances shared by every check.

use serde::{Deserialize, Serialize};

/// Tolerance set. Every field can be overridden from a scenario file or the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Hermiticity check on input matrices.
    pub herm: f64,
    /// Unit-trace check on states.
    pub trace: f64,
    /// Smallest admissible eigenvalue (negated) for positive operators and weights.
    pub psd: f64,
    /// Agreement tolerance for identities, relations and radicand clamping.
    pub num: f64,
    /// Relative eigenvalue cutoff for the Gram pseudoinverse.
    pub pinv: f64,
    /// Eigenvalue grouping width when building projective measurements.
    pub spec: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-9,
            trace: 1e-9,
            psd: 1e-9,
            num: 1e-8,
            pinv: 1e-10,
            spec: 1e-9,
        }
    }
}

/// Outcome probabilities at or below this are treated as exactly zero.
pub const ZERO_PROB: f64 = 1e-14;

/// Agreement required of exact reductions (non-informative measurements).
pub const REDUCTION_TOL: f64 = 1e-10;
