//! Classical and quantum Fisher information of the phase channel.
//!
//! The interaction K(φ) = ⊗RZ(φ) has the diagonal generator G = ½ΣZ, so the
//! state derivative is computed analytically: ∂|ψ> = -iG K(φ)|ψ> for pure
//! probes and ∂ρ = -i[G, K(φ)ρK(φ)†] for mixed ones. No finite differencing
//! enters the φ derivative.

use crate::circuit::{
    generator_eigenvalue, interact, meas_layer_rho, meas_layer_vec, prepare, SensorCircuit,
};
use crate::matrix::{eigh, ComplexMatrix};
use crate::state::QuantumState;
use crate::tolerance::Tolerances;
use crate::{Error, Result, C64};

/// ∂_φ of a probe state, in the same representation as the state itself.
#[derive(Debug, Clone)]
pub enum StateDerivative {
    Pure(Vec<C64>),
    Mixed(ComplexMatrix),
}

/// Fisher information of a device at one evaluation phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherResult {
    pub cfi: f64,
    pub qfi: f64,
    pub phi: f64,
}

/// Analytic ∂_φ [K(φ)·state], taking the state *before* the interaction.
pub fn dstate_dphi(state_before: &QuantumState, phi: f64) -> StateDerivative {
    let n = state_before.n();
    match state_before {
        QuantumState::Pure { amps, .. } => {
            let d = amps
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let g = generator_eigenvalue(i, n);
                    a * C64::cis(-phi * g) * C64::new(0.0, -g)
                })
                .collect();
            StateDerivative::Pure(d)
        }
        QuantumState::Mixed { rho, .. } => {
            let dim = 1usize << n;
            let mut d = ComplexMatrix::zeros(dim, dim);
            for i in 0..dim {
                for j in 0..dim {
                    let delta = generator_eigenvalue(i, n) - generator_eigenvalue(j, n);
                    d[(i, j)] = rho[(i, j)] * C64::cis(-phi * delta) * C64::new(0.0, -delta);
                }
            }
            StateDerivative::Mixed(d)
        }
    }
}

/// Classical Fisher information Σ (∂p)²/p, skipping entries below the
/// probability floor.
pub fn cfi(probs: &[f64], dprobs: &[f64]) -> f64 {
    cfi_with(probs, dprobs, &Tolerances::DEFAULT)
}

pub fn cfi_with(probs: &[f64], dprobs: &[f64], tol: &Tolerances) -> f64 {
    debug_assert_eq!(probs.len(), dprobs.len());
    debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-8);
    debug_assert!(dprobs.iter().sum::<f64>().abs() < 1e-8);
    probs
        .iter()
        .zip(dprobs)
        .filter(|(&p, _)| p > tol.prob_floor)
        .map(|(&p, &dp)| dp * dp / p)
        .sum()
}

/// Pure-state QFI 4(<∂ψ|∂ψ> - |<∂ψ|ψ>|²), clamped at zero.
pub fn qfi_pure(psi: &[C64], dpsi: &[C64]) -> f64 {
    debug_assert_eq!(psi.len(), dpsi.len());
    let dd: f64 = dpsi.iter().map(|d| d.norm_sqr()).sum();
    let overlap: C64 = dpsi.iter().zip(psi).map(|(d, p)| d.conj() * p).sum();
    let q = 4.0 * (dd - overlap.norm_sqr());
    q.max(0.0)
}

/// Mixed-state QFI from the spectral decomposition of ρ:
/// Σ 2|<λ_i|∂ρ|λ_i'>|²/(λ_i+λ_i') over pairs above the eigenvalue floor.
pub fn qfi_mixed(rho: &ComplexMatrix, drho: &ComplexMatrix) -> Result<f64> {
    qfi_mixed_with(rho, drho, &Tolerances::DEFAULT)
}

pub fn qfi_mixed_with(rho: &ComplexMatrix, drho: &ComplexMatrix, tol: &Tolerances) -> Result<f64> {
    let (vals, vecs) = eigh(rho)?;
    let m = vecs.dagger().matmul(drho).matmul(&vecs);
    let dim = vals.len();
    let mut q = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let denom = vals[i] + vals[j];
            if denom > tol.eig_floor {
                q += 2.0 * m[(i, j)].norm_sqr() / denom;
            }
        }
    }
    Ok(q.max(0.0))
}

/// QFI of a prepared probe at phase φ, dispatching on the representation.
pub fn qfi_at(prepared: &QuantumState, phi: f64) -> Result<f64> {
    let deriv = dstate_dphi(prepared, phi);
    match (&interact(prepared, phi), &deriv) {
        (QuantumState::Pure { amps, .. }, StateDerivative::Pure(d)) => Ok(qfi_pure(amps, d)),
        (QuantumState::Mixed { rho, .. }, StateDerivative::Mixed(d)) => qfi_mixed(rho, d),
        _ => unreachable!("derivative kind always matches the state kind"),
    }
}

/// Outcome probabilities p(s|φ) after the μ layer, together with their
/// analytic φ derivatives.
pub fn measured_probs_and_derivs(
    prepared: &QuantumState,
    circuit: &SensorCircuit,
    mu: &[f64],
    phi: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if mu.len() != circuit.n_mu() {
        return Err(Error::BadLength {
            got: mu.len(),
            expected: circuit.n_mu(),
        });
    }
    match (interact(prepared, phi), dstate_dphi(prepared, phi)) {
        (QuantumState::Pure { mut amps, .. }, StateDerivative::Pure(mut damps)) => {
            meas_layer_vec(circuit, mu, &mut amps)?;
            meas_layer_vec(circuit, mu, &mut damps)?;
            let probs = amps.iter().map(|a| a.norm_sqr()).collect();
            let dprobs = amps
                .iter()
                .zip(&damps)
                .map(|(a, d)| 2.0 * (a.conj() * d).re)
                .collect();
            Ok((probs, dprobs))
        }
        (QuantumState::Mixed { mut rho, .. }, StateDerivative::Mixed(mut drho)) => {
            meas_layer_rho(circuit, mu, &mut rho)?;
            meas_layer_rho(circuit, mu, &mut drho)?;
            let dim = rho.rows();
            let probs = (0..dim).map(|i| rho[(i, i)].re).collect();
            let dprobs = (0..dim).map(|i| drho[(i, i)].re).collect();
            Ok((probs, dprobs))
        }
        _ => unreachable!("derivative kind always matches the state kind"),
    }
}

/// CFI of the measured outcome distribution at (μ, φ) for a prepared probe.
pub fn cfi_at(
    prepared: &QuantumState,
    circuit: &SensorCircuit,
    mu: &[f64],
    phi: f64,
) -> Result<f64> {
    let (probs, dprobs) = measured_probs_and_derivs(prepared, circuit, mu, phi)?;
    Ok(cfi(&probs, &dprobs))
}

/// Evaluate both Fisher quantities for a parameterized device.
pub fn fisher_at(
    circuit: &SensorCircuit,
    theta: &[f64],
    mu: &[f64],
    phi: f64,
) -> Result<FisherResult> {
    let prepared = prepare(circuit, theta)?;
    let cfi = cfi_at(&prepared, circuit, mu, phi)?;
    let qfi = qfi_at(&prepared, phi)?;
    debug_assert!(cfi <= qfi + 1e-8, "cfi {cfi} exceeds qfi {qfi}");
    debug_assert!(qfi <= (circuit.n() * circuit.n()) as f64 + 1e-8);
    Ok(FisherResult { cfi, qfi, phi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_ansatz, hea2_bell_theta, x_basis_mu, Ansatz};
    use crate::gates::{gate_matrix, GateKind};

    fn ghz(n: usize) -> QuantumState {
        let r = 1.0 / 2.0_f64.sqrt();
        let mut amps = vec![C64::ZERO; 1 << n];
        amps[0] = C64::new(r, 0.0);
        amps[(1 << n) - 1] = C64::new(r, 0.0);
        QuantumState::from_amplitudes(n, amps).unwrap()
    }

    fn plus() -> QuantumState {
        let r = 1.0 / 2.0_f64.sqrt();
        QuantumState::from_amplitudes(1, vec![C64::new(r, 0.0), C64::new(r, 0.0)]).unwrap()
    }

    #[test]
    fn cfi_of_cos_squared_fringe_is_one() {
        for k in 1..10 {
            let phi = 0.3 * k as f64;
            if phi >= std::f64::consts::PI {
                break;
            }
            let p = [(phi / 2.0).cos().powi(2), (phi / 2.0).sin().powi(2)];
            let dp = [-phi.sin() / 2.0, phi.sin() / 2.0];
            assert!((cfi(&p, &dp) - 1.0).abs() < 1e-12, "phi={phi}");
        }
    }

    #[test]
    fn cfi_of_flat_distribution_is_zero() {
        let p = [0.25; 4];
        let dp = [0.0; 4];
        assert_eq!(cfi(&p, &dp), 0.0);
    }

    #[test]
    fn ghz4_with_x_parity_readout_reaches_cfi_16() {
        // GHZ probe, analytic derivative, Hadamard readout on every qubit.
        let n = 4;
        let state = ghz(n);
        let phi = 0.21;
        let rotated = interact(&state, phi);
        let deriv = dstate_dphi(&state, phi);
        let (mut amps, mut damps) = match (rotated, deriv) {
            (QuantumState::Pure { amps, .. }, StateDerivative::Pure(d)) => (amps, d),
            _ => unreachable!(),
        };
        let h = gate_matrix(GateKind::H, 0.0).unwrap();
        for q in 0..n {
            crate::state::apply_gate_vec(&h, &[q], n, &mut amps);
            crate::state::apply_gate_vec(&h, &[q], n, &mut damps);
        }
        let probs: Vec<f64> = amps.iter().map(|a| a.norm_sqr()).collect();
        let dprobs: Vec<f64> = amps
            .iter()
            .zip(&damps)
            .map(|(a, d)| 2.0 * (a.conj() * d).re)
            .collect();
        assert!((cfi(&probs, &dprobs) - 16.0).abs() < 1e-6);
    }

    #[test]
    fn qfi_pure_plus_state_is_one() {
        let phi = 0.4;
        let rotated = interact(&plus(), phi);
        let deriv = dstate_dphi(&plus(), phi);
        match (rotated, deriv) {
            (QuantumState::Pure { amps, .. }, StateDerivative::Pure(d)) => {
                assert!((qfi_pure(&amps, &d) - 1.0).abs() < 1e-12);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn qfi_zero_for_generator_eigenstate() {
        let state = QuantumState::zero(3).unwrap();
        assert!(qfi_at(&state, 0.7).unwrap() < 1e-12);
    }

    #[test]
    fn qfi_of_ghz_hits_heisenberg_limit() {
        for n in 2..=6 {
            let q = qfi_at(&ghz(n), 0.33).unwrap();
            assert!((q - (n * n) as f64).abs() < 1e-8, "n={n}: qfi={q}");
        }
    }

    #[test]
    fn mixed_qfi_matches_pure_on_projectors() {
        let state = ghz(3);
        let phi = 0.52;
        let pure = qfi_at(&state, phi).unwrap();
        let mixed = qfi_at(&state.to_mixed(), phi).unwrap();
        assert!((pure - mixed).abs() < 1e-7, "{pure} vs {mixed}");
    }

    #[test]
    fn maximally_mixed_state_carries_no_information() {
        let n = 2;
        let dim = 1 << n;
        let eye = ComplexMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0));
        let state = QuantumState::from_density(n, eye).unwrap();
        assert!(qfi_at(&state, 0.9).unwrap() < 1e-12);
    }

    #[test]
    fn fully_dephased_ghz_has_zero_qfi() {
        let mut rho = ComplexMatrix::zeros(16, 16);
        rho[(0, 0)] = C64::new(0.5, 0.0);
        rho[(15, 15)] = C64::new(0.5, 0.0);
        let state = QuantumState::from_density(4, rho).unwrap();
        assert!(qfi_at(&state, 0.4).unwrap() < 1e-8);
    }

    #[test]
    fn plus_state_expectation_slope_is_minus_sin() {
        // d<σx>/dφ = <ψ|σx|∂ψ> + c.c. on RZ(φ)|+>.
        for k in 0..8 {
            let phi = -1.2 + 0.4 * k as f64;
            let rotated = interact(&plus(), phi);
            let deriv = dstate_dphi(&plus(), phi);
            let (amps, damps) = match (rotated, deriv) {
                (QuantumState::Pure { amps, .. }, StateDerivative::Pure(d)) => (amps, d),
                _ => unreachable!(),
            };
            // σx swaps the two amplitudes.
            let sx_dpsi = [damps[1], damps[0]];
            let slope: f64 = 2.0 * (amps[0].conj() * sx_dpsi[0] + amps[1].conj() * sx_dpsi[1]).re;
            assert!((slope + phi.sin()).abs() < 1e-12, "phi={phi}");
        }
    }

    #[test]
    fn fisher_result_orders_cfi_below_qfi() {
        let circuit = build_ansatz(Ansatz::Hea, 2, 1, 0.0).unwrap();
        let theta: Vec<f64> = (0..circuit.n_theta())
            .map(|i| 0.21 * i as f64 - 0.5)
            .collect();
        let mu: Vec<f64> = (0..circuit.n_mu()).map(|i| 0.17 * i as f64 + 0.1).collect();
        let fi = fisher_at(&circuit, &theta, &mu, 0.37).unwrap();
        assert!(fi.cfi >= 0.0);
        assert!(fi.cfi <= fi.qfi + 1e-8);
        assert!(fi.qfi <= 4.0 + 1e-8);
    }

    #[test]
    fn bell_probe_with_x_readout_saturates_qfi() {
        let circuit = build_ansatz(Ansatz::Hea, 2, 1, 0.0).unwrap();
        let fi = fisher_at(
            &circuit,
            &hea2_bell_theta(),
            &x_basis_mu(2),
            std::f64::consts::FRAC_PI_4,
        )
        .unwrap();
        assert!((fi.qfi - 4.0).abs() < 1e-9);
        assert!((fi.cfi - 4.0).abs() < 1e-9);
    }

    #[test]
    fn qfi_ignores_measurement_parameters() {
        let circuit = build_ansatz(Ansatz::Hea, 2, 1, 0.0).unwrap();
        let theta: Vec<f64> = (0..circuit.n_theta())
            .map(|i| 0.31 * i as f64 - 0.8)
            .collect();
        let base = fisher_at(&circuit, &theta, &vec![0.0; circuit.n_mu()], 0.42)
            .unwrap()
            .qfi;
        for k in 1..=5 {
            let mu: Vec<f64> = (0..circuit.n_mu())
                .map(|i| (k * 13 + i * 7) as f64 * 0.11)
                .collect();
            let qfi = fisher_at(&circuit, &theta, &mu, 0.42).unwrap().qfi;
            assert!((qfi - base).abs() < 1e-10);
        }
    }
}
