//! Cross-checks of the analytic paths against independent references: the
//! dense full-matrix simulator, finite differences for the φ derivative, and
//! Richardson-extrapolated gradients for the optimizer.

mod common;

use common::{naive_apply, random_state, richardson_diff};
use vqs_core::circuit::{build_ansatz, interact, measure_probs, prepare, Ansatz};
use vqs_core::fisher::{dstate_dphi, measured_probs_and_derivs, qfi_pure, StateDerivative};
use vqs_core::gates::gate_matrix;
use vqs_core::optimize::{grad_objective, objective_value, Objective};
use vqs_core::QuantumState;

/// Gate-by-gate full-matrix replay of an ansatz preparation.
fn naive_prepare(circuit: &vqs_core::circuit::SensorCircuit, theta: &[f64]) -> Vec<vqs_core::C64> {
    let n = circuit.n();
    let mut amps = vec![vqs_core::C64::ZERO; 1 << n];
    amps[0] = vqs_core::C64::ONE;
    for gate in circuit.prep_gates() {
        let u = gate_matrix(gate.kind, gate.angle_value(theta)).unwrap();
        amps = naive_apply(&amps, &u, &gate.targets, n);
    }
    amps
}

#[test]
fn prepare_matches_full_matrix_replay() {
    for (ansatz, n, d, seed) in [
        (Ansatz::Hea, 3, 2, 11u64),
        (Ansatz::Tia, 3, 2, 12),
        (Ansatz::Graph, 4, 1, 13),
    ] {
        let circuit = build_ansatz(ansatz, n, d, 0.0).unwrap();
        let theta: Vec<f64> = (0..circuit.n_theta())
            .map(|i| ((seed as f64) * 0.37 + i as f64 * 0.61).sin() * 2.0)
            .collect();
        let fast = prepare(&circuit, &theta).unwrap();
        let slow = naive_prepare(&circuit, &theta);
        match fast {
            QuantumState::Pure { amps, .. } => {
                for (a, b) in amps.iter().zip(&slow) {
                    assert!((a - b).norm() < 1e-10, "{ansatz:?}");
                }
            }
            _ => panic!("expected pure"),
        }
    }
}

#[test]
fn all_zero_theta_hea_matches_oracle_product_state() {
    // With θ = 0 every rotation is the identity and only the CZ pattern acts
    // on |0...0>, which it leaves unchanged; the oracle confirms gate by gate.
    let circuit = build_ansatz(Ansatz::Hea, 4, 2, 0.0).unwrap();
    let theta = vec![0.0; circuit.n_theta()];
    let state = prepare(&circuit, &theta).unwrap();
    let oracle = naive_prepare(&circuit, &theta);
    assert!((oracle[0].norm() - 1.0).abs() < 1e-12);
    match state {
        QuantumState::Pure { amps, .. } => {
            for (a, b) in amps.iter().zip(&oracle) {
                assert!((a - b).norm() < 1e-12);
            }
        }
        _ => panic!("expected pure"),
    }
}

#[test]
fn analytic_phi_derivative_matches_finite_difference_on_random_states() {
    // max abs deviation of ∂p/∂φ below 1e-6 at FD step 1e-5
    let circuit = build_ansatz(Ansatz::Hea, 3, 1, 0.0).unwrap();
    let mu: Vec<f64> = (0..circuit.n_mu()).map(|i| 0.3 + 0.2 * i as f64).collect();
    let h = 1e-5;
    for seed in 0..8u64 {
        let state = random_state(3, 100 + seed);
        let phi = 0.1 + 0.11 * seed as f64;
        let (_, dprobs) = measured_probs_and_derivs(&state, &circuit, &mu, phi).unwrap();
        let probs_at = |x: f64| measure_probs(&interact(&state, x), &circuit, &mu).unwrap();
        let plus = probs_at(phi + h);
        let minus = probs_at(phi - h);
        for (i, &dp) in dprobs.iter().enumerate() {
            let fd = (plus[i] - minus[i]) / (2.0 * h);
            assert!(
                (dp - fd).abs() < 1e-6,
                "seed {seed} outcome {i}: analytic {dp} vs fd {fd}"
            );
        }
    }
}

#[test]
fn analytic_derivative_matches_fd_for_mixed_states() {
    let gamma = 0.35;
    let circuit = build_ansatz(Ansatz::Hea, 2, 1, gamma).unwrap();
    let theta: Vec<f64> = (0..circuit.n_theta())
        .map(|i| 0.4 - 0.23 * i as f64)
        .collect();
    let mu: Vec<f64> = (0..circuit.n_mu()).map(|i| 0.15 * i as f64).collect();
    let prepared = prepare(&circuit, &theta).unwrap();
    let h = 1e-5;
    for k in 0..5 {
        let phi = 0.2 + 0.17 * k as f64;
        let (_, dprobs) = measured_probs_and_derivs(&prepared, &circuit, &mu, phi).unwrap();
        let probs_at = |x: f64| measure_probs(&interact(&prepared, x), &circuit, &mu).unwrap();
        let plus = probs_at(phi + h);
        let minus = probs_at(phi - h);
        for (i, &dp) in dprobs.iter().enumerate() {
            let fd = (plus[i] - minus[i]) / (2.0 * h);
            assert!((dp - fd).abs() < 1e-6, "outcome {i}: {dp} vs {fd}");
        }
    }
}

#[test]
fn qfi_matches_finite_difference_fidelity_curvature() {
    // For pure states, QFI = 4(<∂ψ|∂ψ> - |<ψ|∂ψ>|²) where a purely numerical
    // route differentiates the statevector itself.
    let h = 1e-5;
    for seed in 0..6u64 {
        let n = 2 + (seed as usize) % 3;
        let state = random_state(n, 500 + seed);
        let phi = 0.3 + 0.1 * seed as f64;
        let deriv = dstate_dphi(&state, phi);
        let analytic = match (interact(&state, phi), &deriv) {
            (QuantumState::Pure { amps, .. }, StateDerivative::Pure(d)) => qfi_pure(&amps, d),
            _ => unreachable!(),
        };
        let amps_at = |x: f64| match interact(&state, x) {
            QuantumState::Pure { amps, .. } => amps,
            _ => unreachable!(),
        };
        let plus = amps_at(phi + h);
        let minus = amps_at(phi - h);
        let fd_dpsi: Vec<vqs_core::C64> = plus
            .iter()
            .zip(&minus)
            .map(|(p, m)| (p - m) / vqs_core::C64::new(2.0 * h, 0.0))
            .collect();
        let numeric = qfi_pure(&amps_at(phi), &fd_dpsi);
        assert!(
            (analytic - numeric).abs() / analytic.max(1e-12) < 1e-6,
            "n={n}: {analytic} vs {numeric}"
        );
    }
}

#[test]
fn parameter_gradient_matches_richardson_reference() {
    let circuit = build_ansatz(Ansatz::Hea, 2, 1, 0.0).unwrap();
    let theta: Vec<f64> = (0..circuit.n_theta())
        .map(|i| (0.9 * i as f64 + 0.2).sin() * 1.4)
        .collect();
    let mu: Vec<f64> = (0..circuit.n_mu())
        .map(|i| (1.3 * i as f64 - 0.4).cos() * 1.1)
        .collect();
    let phi = 0.45;
    let grad = grad_objective(&circuit, &theta, &mu, phi, Objective::Cfi).unwrap();

    let mut reference = Vec::new();
    for i in 0..theta.len() + mu.len() {
        let f = |x: f64| {
            let mut th = theta.clone();
            let mut m = mu.clone();
            if i < th.len() {
                th[i] = x;
            } else {
                m[i - th.len()] = x;
            }
            objective_value(&circuit, &th, &m, phi, Objective::Cfi).unwrap()
        };
        let x0 = if i < theta.len() {
            theta[i]
        } else {
            mu[i - theta.len()]
        };
        reference.push(richardson_diff(f, x0, 1e-3));
    }
    let got: Vec<f64> = grad.theta.iter().chain(grad.mu.iter()).copied().collect();
    let scale = reference
        .iter()
        .fold(0.0_f64, |acc, &x| acc.max(x.abs()))
        .max(1e-8);
    for (i, (&g, &r)) in got.iter().zip(&reference).enumerate() {
        assert!(
            (g - r).abs() / scale < 1e-4,
            "component {i}: fd {g} vs richardson {r}"
        );
    }
}

#[test]
fn fisher_quantities_are_invariant_under_global_phase() {
    let circuit = build_ansatz(Ansatz::Hea, 2, 1, 0.0).unwrap();
    let mu: Vec<f64> = (0..circuit.n_mu()).map(|i| 0.4 + 0.1 * i as f64).collect();
    let state = random_state(2, 7);
    let phase = vqs_core::C64::cis(1.234);
    let shifted = match &state {
        QuantumState::Pure { n, amps } => QuantumState::Pure {
            n: *n,
            amps: amps.iter().map(|a| a * phase).collect(),
        },
        _ => unreachable!(),
    };
    let phi = 0.52;
    let q0 = vqs_core::fisher::qfi_at(&state, phi).unwrap();
    let q1 = vqs_core::fisher::qfi_at(&shifted, phi).unwrap();
    assert!((q0 - q1).abs() < 1e-9);
    let c0 = vqs_core::fisher::cfi_at(&state, &circuit, &mu, phi).unwrap();
    let c1 = vqs_core::fisher::cfi_at(&shifted, &circuit, &mu, phi).unwrap();
    assert!((c0 - c1).abs() < 1e-9);
}

#[test]
fn graph_plateau_fixture_reaches_half_heisenberg_qfi() {
    // Complete-bipartite probe with every readout axis on X: QFI = n²/2.
    let n = 4;
    let circuit = build_ansatz(Ansatz::Graph, n, 1, 0.0).unwrap();
    let state = prepare(&circuit, &vqs_core::circuit::graph_plateau_theta(n)).unwrap();
    let qfi = vqs_core::fisher::qfi_at(&state, 0.3).unwrap();
    let target = (n * n) as f64 / 2.0;
    assert!(
        (qfi - target).abs() / target < 0.01,
        "graph fixture qfi {qfi}, expected {target}"
    );
}

#[test]
fn mixed_qfi_agrees_with_pure_qfi_on_random_projectors() {
    for n in 1..=4usize {
        for k in 0..25u64 {
            let state = random_state(n, 9000 + 100 * n as u64 + k);
            let phi = 0.1 + 0.02 * k as f64;
            let pure = vqs_core::fisher::qfi_at(&state, phi).unwrap();
            let mixed = vqs_core::fisher::qfi_at(&state.to_mixed(), phi).unwrap();
            assert!(
                (pure - mixed).abs() < 1e-7,
                "n={n} k={k}: pure {pure} vs mixed {mixed}"
            );
        }
    }
}
