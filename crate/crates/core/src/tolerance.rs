//! The single place where numerical thresholds live.

/// Numerical thresholds shared by every module.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Operator-level checks: idempotency, orthogonality, completeness,
    /// unitarity.
    pub structural: f64,
    /// Scalar checks: hermiticity, normalization, imaginary residues.
    pub scalar: f64,
    /// Minimum Born probability for a Lüders collapse.
    pub collapse: f64,
    /// Minimum ABL denominator before a post-selection is declared impossible.
    pub impossibility: f64,
    /// Largest total Hilbert-space dimension any constructor will build.
    pub max_dim: usize,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        structural: 1e-10,
        scalar: 1e-12,
        collapse: 1e-14,
        impossibility: 1e-14,
        max_dim: 1 << 20,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
