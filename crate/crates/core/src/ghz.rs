//! GHZ reference protocol: noisy GHZ preparation, X-basis parity measurement,
//! the analytic parity likelihood, and grid-restricted maximum-likelihood
//! estimation.
//!
//! The MLE always inverts the noise-free likelihood cos²(nφ/2) / sin²(nφ/2),
//! whatever γ actually corrupted the probe. That choice reproduces the
//! baseline's signature behavior: its bias grows with γ while the reported
//! posterior width does not.

use crate::circuit::{dephase_rho, interact};
use crate::estimator::{estimate, normalize_log, posterior_variance, EstimateReport, EstimateRow};
use crate::fisher::{cfi, dstate_dphi, StateDerivative};
use crate::gates::{gate_matrix, GateKind};
use crate::matrix::ComplexMatrix;
use crate::sampling::sample_shots;
use crate::state::{
    apply_gate_rho, apply_gate_vec, QuantumState, MAX_QUBITS_MIXED, MAX_QUBITS_PURE,
};
use crate::{Error, Result, C64};

/// GHZ comparison protocol: probe size, preparation noise, and the MLE search
/// grid (kept equal to the neural estimator's bins so reports align).
#[derive(Debug, Clone, PartialEq)]
pub struct GhzProtocol {
    pub n: usize,
    pub gamma: f64,
    pub phi_grid: Vec<f64>,
}

impl GhzProtocol {
    pub fn new(n: usize, gamma: f64, phi_grid: Vec<f64>) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::BadConfig(format!("gamma {gamma} outside [0, 1]")));
        }
        if !phi_grid.windows(2).all(|w| w[0] < w[1]) || phi_grid.is_empty() {
            return Err(Error::BadConfig("phi grid must be ascending".into()));
        }
        Ok(GhzProtocol { n, gamma, phi_grid })
    }
}

/// Prepare the GHZ state: H on qubit 0, then CNOT(0, i) for i = 1..n, with
/// the dephasing channel on control and target after every CNOT.
pub fn ghz_prepare(n: usize, gamma: f64) -> Result<QuantumState> {
    if n < 2 {
        return Err(Error::BadSize(format!(
            "GHZ needs at least 2 qubits, got {n}"
        )));
    }
    let cap = if gamma > 0.0 {
        MAX_QUBITS_MIXED
    } else {
        MAX_QUBITS_PURE
    };
    if n > cap {
        return Err(Error::BadSize(format!(
            "{n} qubits exceeds the dense-simulation cap of {cap}"
        )));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::BadConfig(format!("gamma {gamma} outside [0, 1]")));
    }
    let h = gate_matrix(GateKind::H, 0.0)?;
    let cnot = gate_matrix(GateKind::Cnot, 0.0)?;
    if gamma > 0.0 {
        let dim = 1usize << n;
        let mut rho = ComplexMatrix::zeros(dim, dim);
        rho[(0, 0)] = C64::ONE;
        apply_gate_rho(&h, &[0], n, &mut rho);
        for i in 1..n {
            apply_gate_rho(&cnot, &[0, i], n, &mut rho);
            dephase_rho(&mut rho, 0, n, gamma);
            dephase_rho(&mut rho, i, n, gamma);
        }
        Ok(QuantumState::Mixed { n, rho })
    } else {
        let mut amps = vec![C64::ZERO; 1 << n];
        amps[0] = C64::ONE;
        apply_gate_vec(&h, &[0], n, &mut amps);
        for i in 1..n {
            apply_gate_vec(&cnot, &[0, i], n, &mut amps);
        }
        Ok(QuantumState::Pure { n, amps })
    }
}

/// Sum of the bits modulo two.
pub fn parity(bits: &[u8]) -> u8 {
    bits.iter().fold(0, |acc, &b| acc ^ (b & 1))
}

/// Noise-free parity likelihood: cos²(nφ/2) for even, sin²(nφ/2) for odd.
pub fn parity_likelihood(parity_bit: u8, n: usize, phi: f64) -> f64 {
    let half = n as f64 * phi / 2.0;
    if parity_bit == 0 {
        half.cos().powi(2)
    } else {
        half.sin().powi(2)
    }
}

/// Exact parity-outcome probabilities of the simulated noisy probe, measured
/// in the X basis on every qubit.
pub fn ghz_parity_probs(n: usize, gamma: f64, phi: f64) -> Result<(f64, f64)> {
    let ((pe, po), _) = ghz_parity_probs_and_derivs(n, gamma, phi)?;
    Ok((pe, po))
}

/// Parity probabilities together with their analytic φ derivatives; the pair
/// feeds the classical Fisher information of the baseline.
pub fn ghz_parity_probs_and_derivs(
    n: usize,
    gamma: f64,
    phi: f64,
) -> Result<((f64, f64), (f64, f64))> {
    let probe = ghz_prepare(n, gamma)?;
    let rotated = interact(&probe, phi);
    let deriv = dstate_dphi(&probe, phi);
    let h = gate_matrix(GateKind::H, 0.0)?;

    let (probs, dprobs): (Vec<f64>, Vec<f64>) = match (rotated, deriv) {
        (QuantumState::Pure { mut amps, .. }, StateDerivative::Pure(mut damps)) => {
            for q in 0..n {
                apply_gate_vec(&h, &[q], n, &mut amps);
                apply_gate_vec(&h, &[q], n, &mut damps);
            }
            (
                amps.iter().map(|a| a.norm_sqr()).collect(),
                amps.iter()
                    .zip(&damps)
                    .map(|(a, d)| 2.0 * (a.conj() * d).re)
                    .collect(),
            )
        }
        (QuantumState::Mixed { mut rho, .. }, StateDerivative::Mixed(mut drho)) => {
            for q in 0..n {
                apply_gate_rho(&h, &[q], n, &mut rho);
                apply_gate_rho(&h, &[q], n, &mut drho);
            }
            (
                (0..rho.rows()).map(|i| rho[(i, i)].re).collect(),
                (0..drho.rows()).map(|i| drho[(i, i)].re).collect(),
            )
        }
        _ => unreachable!("derivative kind always matches the state kind"),
    };

    let mut p = [0.0f64; 2];
    let mut dp = [0.0f64; 2];
    for (i, (&pi, &dpi)) in probs.iter().zip(&dprobs).enumerate() {
        let par = (i.count_ones() % 2) as usize;
        p[par] += pi;
        dp[par] += dpi;
    }
    Ok(((p[0], p[1]), (dp[0], dp[1])))
}

/// CFI of the binary parity outcome at (n, γ, φ).
pub fn ghz_parity_cfi(n: usize, gamma: f64, phi: f64) -> Result<f64> {
    let ((pe, po), (dpe, dpo)) = ghz_parity_probs_and_derivs(n, gamma, phi)?;
    Ok(cfi(&[pe, po], &[dpe, dpo]))
}

/// Maximum-likelihood estimate over the grid from a parity sequence, with the
/// log-space posterior. Ties resolve to the lowest grid index.
pub fn ghz_mle(parity_sequence: &[u8], n: usize, phi_grid: &[f64]) -> (f64, Vec<f64>) {
    assert!(!parity_sequence.is_empty(), "need at least one parity bit");
    let k_even = parity_sequence.iter().filter(|&&b| b == 0).count() as f64;
    let k_odd = parity_sequence.len() as f64 - k_even;
    // Zero counts contribute nothing even where the likelihood vanishes
    // (guards against 0·ln 0 at the grid endpoints).
    let term = |count: f64, p: f64| if count > 0.0 { count * p.ln() } else { 0.0 };
    let log_post: Vec<f64> = phi_grid
        .iter()
        .map(|&phi| {
            term(k_even, parity_likelihood(0, n, phi)) + term(k_odd, parity_likelihood(1, n, phi))
        })
        .collect();
    let posterior = normalize_log(&log_post);
    (estimate(&posterior, phi_grid), posterior)
}

/// Sample a pool of parity outcomes from the exact noisy parity distribution.
pub fn ghz_parity_pool(n: usize, gamma: f64, phi: f64, count: usize, seed: u64) -> Result<Vec<u8>> {
    let (pe, po) = ghz_parity_probs(n, gamma, phi)?;
    Ok(sample_shots(&[pe, po], count, seed)
        .into_iter()
        .map(|o| o as u8)
        .collect())
}

/// MLE bias and posterior variance at each sequence length, on disjoint
/// chunks of a parity pool drawn at φ_true. Mirrors the neural estimator's
/// report so the two protocols share a CSV schema.
pub fn ghz_bias_variance(
    proto: &GhzProtocol,
    parities: &[u8],
    phi_true: f64,
    m_grid: &[usize],
    max_sequences: usize,
) -> Result<EstimateReport> {
    let mut report = EstimateReport::default();
    for &m in m_grid {
        if m == 0 {
            return Err(Error::BadConfig(
                "sequence length m must be positive".into(),
            ));
        }
        let n_seq = (parities.len() / m).min(max_sequences);
        if n_seq == 0 {
            return Err(Error::ShapeMismatch(format!(
                "pool of {} parities cannot form a sequence of length {m}",
                parities.len()
            )));
        }
        let mut bias_acc = 0.0;
        let mut var_acc = 0.0;
        let mut sq_acc = 0.0;
        let mut snapshot = Vec::new();
        for s in 0..n_seq {
            let chunk = &parities[s * m..(s + 1) * m];
            let (phi_bar, post) = ghz_mle(chunk, proto.n, &proto.phi_grid);
            bias_acc += phi_bar - phi_true;
            var_acc += posterior_variance(&post, &proto.phi_grid, phi_bar);
            sq_acc += (phi_bar - phi_true) * (phi_bar - phi_true);
            if s == 0 {
                snapshot = post;
            }
        }
        let norm = n_seq as f64;
        report.rows.push(EstimateRow {
            phi_true,
            m,
            n_sequences: n_seq,
            bias: bias_acc / norm,
            variance: var_acc / norm,
            sq_error: sq_acc / norm,
            posterior_snapshot: snapshot,
        });
    }
    Ok(report)
}
