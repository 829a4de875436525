//! Numeric policy shared by validation checks across the crate.

/// Tolerances used for state validation, precondition checks, and the
/// zero-probability guards inside the Fisher information formulas. Tests can
/// tighten or loosen the whole policy by constructing their own record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Hermiticity flag on matrices: |a_ij - conj(a_ji)|.
    pub hermitian: f64,
    /// Pure-state norm and mixed-state trace deviation from 1.
    pub state_norm: f64,
    /// Density-matrix eigenvalues may undershoot zero by this much.
    pub eig_negative: f64,
    /// Unitarity precheck: max |(u†u - I)_ij|.
    pub unitary: f64,
    /// Kraus completeness: max |(Σ A†A - I)_ij|.
    pub kraus: f64,
    /// Probabilities below this are skipped in the CFI sum.
    pub prob_floor: f64,
    /// Eigenvalue-pair sums below this are skipped in the mixed QFI sum.
    pub eig_floor: f64,
    /// Probability vectors must sum to 1 within this.
    pub prob_sum: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        hermitian: 1e-12,
        state_norm: 1e-10,
        eig_negative: 1e-10,
        unitary: 1e-10,
        kraus: 1e-10,
        prob_floor: 1e-12,
        eig_floor: 1e-10,
        prob_sum: 1e-10,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
