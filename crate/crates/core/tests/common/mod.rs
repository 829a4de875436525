//! Shared oracles for the integration tests: a full-matrix reference
//! simulator (independent of the bit-kernel path in the library) and simple
//! deterministic random-state generators.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use vqs_core::matrix::ComplexMatrix;
use vqs_core::{QuantumState, C64};

/// Embed a k-qubit gate into the full 2^n dimensional unitary by its entrywise
/// definition: rows/columns agree outside the targets, and the target bits
/// index into the gate.
pub fn embed_gate(u: &ComplexMatrix, targets: &[usize], n: usize) -> ComplexMatrix {
    let dim = 1usize << n;
    let k = targets.len();
    let gate_index = |basis: usize| -> usize {
        let mut g = 0usize;
        for (m, &t) in targets.iter().enumerate() {
            let bit = (basis >> (n - 1 - t)) & 1;
            g |= bit << (k - 1 - m);
        }
        g
    };
    let rest_mask: usize = {
        let mut mask = dim - 1;
        for &t in targets {
            mask &= !(1usize << (n - 1 - t));
        }
        mask
    };
    let mut full = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            if i & rest_mask == j & rest_mask {
                full[(i, j)] = u[(gate_index(i), gate_index(j))];
            }
        }
    }
    full
}

/// Apply a gate via the dense embedding; the reference path for checking the
/// library's in-place kernels.
pub fn naive_apply(amps: &[C64], u: &ComplexMatrix, targets: &[usize], n: usize) -> Vec<C64> {
    embed_gate(u, targets, n).matvec(amps)
}

/// Deterministic normalized random state.
pub fn random_state(n: usize, seed: u64) -> QuantumState {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let dim = 1usize << n;
    let mut amps: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    QuantumState::from_amplitudes(n, amps).unwrap()
}

/// Deterministic random hermitian matrix with entries of order one.
pub fn random_hermitian(dim: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut m = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            if i == j {
                m[(i, j)] = C64::new(rng.random_range(-1.0..1.0), 0.0);
            } else {
                let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
    }
    m
}

/// Central finite difference of a scalar function.
pub fn central_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Richardson-extrapolated derivative: two central differences combined to
/// fourth order.
pub fn richardson_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
    let d2 = (f(x + h / 2.0) - f(x - h / 2.0)) / h;
    (4.0 * d2 - d1) / 3.0
}
