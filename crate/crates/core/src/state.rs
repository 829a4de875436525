//! Pure state vectors and density matrices over n qubits, with in-place gate
//! and Kraus-channel application.
//!
//! Qubit 0 is the leftmost bit of a bitstring; a basis index is the big-endian
//! integer of its bitstring. For a gate on ordered `targets`, `targets[0]` is
//! the most significant bit of the gate-local index.

use crate::matrix::ComplexMatrix;
use crate::tolerance::Tolerances;
use crate::{Error, Result, C64};

/// Hard caps for dense simulation.
pub const MAX_QUBITS_PURE: usize = 12;
pub const MAX_QUBITS_MIXED: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure { n: usize, amps: Vec<C64> },
    Mixed { n: usize, rho: ComplexMatrix },
}

impl QuantumState {
    /// The all-zero computational basis state |0...0>.
    pub fn zero(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS_PURE {
            return Err(Error::BadSize(format!(
                "qubit count {n} outside 1..={MAX_QUBITS_PURE}"
            )));
        }
        let mut amps = vec![C64::ZERO; 1 << n];
        amps[0] = C64::ONE;
        Ok(QuantumState::Pure { n, amps })
    }

    pub fn from_amplitudes(n: usize, amps: Vec<C64>) -> Result<Self> {
        Self::from_amplitudes_with(n, amps, &Tolerances::DEFAULT)
    }

    pub fn from_amplitudes_with(n: usize, amps: Vec<C64>, tol: &Tolerances) -> Result<Self> {
        if amps.len() != 1 << n {
            return Err(Error::ShapeMismatch(format!(
                "{n}-qubit pure state needs {} amplitudes, got {}",
                1 << n,
                amps.len()
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > tol.state_norm {
            return Err(Error::InvalidState(format!(
                "pure-state norm {norm} deviates from 1 beyond {}",
                tol.state_norm
            )));
        }
        Ok(QuantumState::Pure { n, amps })
    }

    pub fn from_density(n: usize, rho: ComplexMatrix) -> Result<Self> {
        Self::from_density_with(n, rho, &Tolerances::DEFAULT)
    }

    pub fn from_density_with(n: usize, rho: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let dim = 1usize << n;
        if rho.rows() != dim || rho.cols() != dim {
            return Err(Error::ShapeMismatch(format!(
                "{n}-qubit density matrix must be {dim}x{dim}, got {}x{}",
                rho.rows(),
                rho.cols()
            )));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > tol.state_norm || tr.im.abs() > tol.state_norm {
            return Err(Error::InvalidState(format!("trace {tr} deviates from 1")));
        }
        let dev = rho.hermitian_deviation();
        if dev > tol.hermitian.max(1e-10) {
            return Err(Error::InvalidState(format!(
                "density matrix not hermitian (deviation {dev:.3e})"
            )));
        }
        Ok(QuantumState::Mixed { n, rho })
    }

    pub fn n(&self) -> usize {
        match self {
            QuantumState::Pure { n, .. } | QuantumState::Mixed { n, .. } => *n,
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.n()
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, QuantumState::Pure { .. })
    }

    /// Promote to a density-matrix representation; mixed states pass through.
    pub fn to_mixed(&self) -> Self {
        match self {
            QuantumState::Pure { n, amps } => {
                let dim = amps.len();
                let mut rho = ComplexMatrix::zeros(dim, dim);
                for i in 0..dim {
                    for j in 0..dim {
                        rho[(i, j)] = amps[i] * amps[j].conj();
                    }
                }
                QuantumState::Mixed { n: *n, rho }
            }
            QuantumState::Mixed { .. } => self.clone(),
        }
    }

    /// Computational-basis outcome probabilities.
    pub fn probabilities(&self) -> Vec<f64> {
        match self {
            QuantumState::Pure { amps, .. } => amps.iter().map(|a| a.norm_sqr()).collect(),
            QuantumState::Mixed { rho, .. } => (0..rho.rows()).map(|i| rho[(i, i)].re).collect(),
        }
    }

    /// Σ|a|² for pure states; Re(Tr ρ) for mixed.
    pub fn norm(&self) -> f64 {
        match self {
            QuantumState::Pure { amps, .. } => amps.iter().map(|a| a.norm_sqr()).sum(),
            QuantumState::Mixed { rho, .. } => rho.trace().re,
        }
    }

    /// Tr(ρ²); exactly the squared norm for pure states.
    pub fn purity(&self) -> f64 {
        match self {
            QuantumState::Pure { amps, .. } => {
                let s: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
                s * s
            }
            QuantumState::Mixed { rho, .. } => {
                let mut acc = 0.0;
                for i in 0..rho.rows() {
                    for j in 0..rho.cols() {
                        acc += (rho[(i, j)] * rho[(j, i)]).re;
                    }
                }
                acc
            }
        }
    }

    /// |<other|self>|² against a pure reference.
    pub fn fidelity_with_pure(&self, reference: &[C64]) -> f64 {
        match self {
            QuantumState::Pure { amps, .. } => {
                let ov: C64 = reference.iter().zip(amps).map(|(r, a)| r.conj() * a).sum();
                ov.norm_sqr()
            }
            QuantumState::Mixed { rho, .. } => {
                let mut acc = C64::ZERO;
                for i in 0..rho.rows() {
                    for j in 0..rho.cols() {
                        acc += reference[i].conj() * rho[(i, j)] * reference[j];
                    }
                }
                acc.re
            }
        }
    }

    /// Full invariant check, including the eigenvalue floor for mixed states.
    pub fn validate_with(&self, tol: &Tolerances) -> Result<()> {
        match self {
            QuantumState::Pure { amps, .. } => {
                let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
                if (norm - 1.0).abs() > tol.state_norm {
                    return Err(Error::InvalidState(format!("norm {norm} != 1")));
                }
            }
            QuantumState::Mixed { rho, .. } => {
                let tr = rho.trace();
                if (tr.re - 1.0).abs() > tol.state_norm || tr.im.abs() > tol.state_norm {
                    return Err(Error::InvalidState(format!("trace {tr} != 1")));
                }
                let dev = rho.hermitian_deviation();
                if dev > tol.hermitian.max(1e-10) {
                    return Err(Error::InvalidState(format!(
                        "not hermitian (deviation {dev:.3e})"
                    )));
                }
                let (vals, _) = crate::matrix::eigh_with(rho, tol)?;
                if let Some(v) = vals.first() {
                    if *v < -tol.eig_negative {
                        return Err(Error::InvalidState(format!("negative eigenvalue {v}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Apply a unitary on the given ordered target qubits.
    pub fn apply_unitary(&self, u: &ComplexMatrix, targets: &[usize]) -> Result<Self> {
        self.apply_unitary_with(u, targets, &Tolerances::DEFAULT)
    }

    pub fn apply_unitary_with(
        &self,
        u: &ComplexMatrix,
        targets: &[usize],
        tol: &Tolerances,
    ) -> Result<Self> {
        check_targets(self.n(), targets)?;
        if u.rows() != 1 << targets.len() || u.cols() != u.rows() {
            return Err(Error::ShapeMismatch(format!(
                "gate on {} targets must be {0}x{0}, got {1}x{2}",
                1 << targets.len(),
                u.rows(),
                u.cols()
            )));
        }
        let dev = u.unitary_deviation();
        if dev > tol.unitary {
            return Err(Error::NonUnitary { deviation: dev });
        }
        let mut out = self.clone();
        match &mut out {
            QuantumState::Pure { n, amps } => apply_gate_vec(u, targets, *n, amps),
            QuantumState::Mixed { n, rho } => apply_gate_rho(u, targets, *n, rho),
        }
        Ok(out)
    }

    /// Apply a single-qubit Kraus channel ρ → Σ A_i ρ A_i† on `target`.
    ///
    /// Pure inputs are promoted to a density matrix first; the output is
    /// always mixed.
    pub fn apply_kraus(&self, kraus: &[ComplexMatrix], target: usize) -> Result<Self> {
        self.apply_kraus_with(kraus, target, &Tolerances::DEFAULT)
    }

    pub fn apply_kraus_with(
        &self,
        kraus: &[ComplexMatrix],
        target: usize,
        tol: &Tolerances,
    ) -> Result<Self> {
        check_targets(self.n(), &[target])?;
        let mut sum = ComplexMatrix::zeros(2, 2);
        for a in kraus {
            if a.rows() != 2 || a.cols() != 2 {
                return Err(Error::ShapeMismatch(
                    "single-qubit Kraus operators must be 2x2".into(),
                ));
            }
            sum = sum.add(&a.dagger().matmul(a));
        }
        let dev = sum.max_abs_diff(&ComplexMatrix::identity(2));
        if dev > tol.kraus {
            return Err(Error::IncompleteKraus { deviation: dev });
        }

        let mixed = self.to_mixed();
        let (n, rho) = match &mixed {
            QuantumState::Mixed { n, rho } => (*n, rho),
            QuantumState::Pure { .. } => unreachable!(),
        };
        let dim = 1 << n;
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for a in kraus {
            let mut term = rho.clone();
            apply_kraus_term(a, target, n, &mut term);
            acc = acc.add(&term);
        }
        Ok(QuantumState::Mixed { n, rho: acc })
    }
}

fn check_targets(n: usize, targets: &[usize]) -> Result<()> {
    let ok = !targets.is_empty()
        && targets.iter().all(|&t| t < n)
        && targets
            .iter()
            .enumerate()
            .all(|(i, t)| !targets[..i].contains(t));
    if ok {
        Ok(())
    } else {
        Err(Error::BadTarget {
            targets: targets.to_vec(),
            n,
        })
    }
}

/// Apply a gate to a raw amplitude vector without validation.
pub(crate) fn apply_gate_vec(u: &ComplexMatrix, targets: &[usize], n: usize, amps: &mut [C64]) {
    let k = targets.len();
    let gd = 1usize << k;
    // Bit position (from the LSB) of each target inside a basis index.
    let shifts: Vec<usize> = targets.iter().map(|&t| n - 1 - t).collect();
    let target_mask: usize = shifts.iter().map(|&s| 1usize << s).sum();
    let dim = 1usize << n;

    let mut idx = vec![0usize; gd];
    let mut scratch = vec![C64::ZERO; gd];
    for base in 0..dim {
        if base & target_mask != 0 {
            continue;
        }
        for (g, slot) in idx.iter_mut().enumerate() {
            let mut i = base;
            for (m, &s) in shifts.iter().enumerate() {
                if (g >> (k - 1 - m)) & 1 == 1 {
                    i |= 1 << s;
                }
            }
            *slot = i;
        }
        for (g, slot) in scratch.iter_mut().enumerate() {
            let mut acc = C64::ZERO;
            for (h, &src) in idx.iter().enumerate() {
                acc += u[(g, h)] * amps[src];
            }
            *slot = acc;
        }
        for (g, &dst) in idx.iter().enumerate() {
            amps[dst] = scratch[g];
        }
    }
}

/// ρ → U ρ U† on the target qubits, applied as a column pass then a row pass.
pub(crate) fn apply_gate_rho(
    u: &ComplexMatrix,
    targets: &[usize],
    n: usize,
    rho: &mut ComplexMatrix,
) {
    let dim = 1usize << n;
    let mut col = vec![C64::ZERO; dim];
    for j in 0..dim {
        for i in 0..dim {
            col[i] = rho[(i, j)];
        }
        apply_gate_vec(u, targets, n, &mut col);
        for i in 0..dim {
            rho[(i, j)] = col[i];
        }
    }
    // Right-multiplying by U† equals applying conj(U) along each row.
    let uc = u.conjugate();
    let mut row = vec![C64::ZERO; dim];
    for i in 0..dim {
        for j in 0..dim {
            row[j] = rho[(i, j)];
        }
        apply_gate_vec(&uc, targets, n, &mut row);
        for j in 0..dim {
            rho[(i, j)] = row[j];
        }
    }
}

/// ρ → A ρ A† for one (not necessarily unitary) 2x2 operator.
fn apply_kraus_term(a: &ComplexMatrix, target: usize, n: usize, rho: &mut ComplexMatrix) {
    apply_gate_rho(a, &[target], n, rho);
}

/// Kraus pair of the local dephasing channel with strength γ.
pub fn dephasing_kraus(gamma: f64) -> [ComplexMatrix; 2] {
    let a0 = ComplexMatrix::diagonal(&[C64::ONE, C64::new((1.0 - gamma).sqrt(), 0.0)]);
    let a1 = ComplexMatrix::diagonal(&[C64::ZERO, C64::new(gamma.sqrt(), 0.0)]);
    [a0, a1]
}
