//! Variational quantum sensing at desk scale.
//!
//! This crate simulates parameterized qubit sensor circuits with dense state
//! vectors and density matrices, computes the classical and quantum Fisher
//! information of the phase channel they probe, drives the circuit parameters
//! towards high-information regimes with an ADAM ascent loop, samples labeled
//! measurement datasets, trains a feed-forward neural network as a Bayesian
//! phase estimator, and benchmarks the resulting protocol against the GHZ
//! parity baseline under dephasing noise.
//!
//! The pipeline, end to end:
//!
//! ```
//! use vqs_core::circuit::{build_ansatz, Ansatz};
//! use vqs_core::fisher::fisher_at;
//!
//! let circuit = build_ansatz(Ansatz::Hea, 2, 1, 0.0).unwrap();
//! let theta = vec![0.1; circuit.n_theta()];
//! let mu = vec![0.2; circuit.n_mu()];
//! let fi = fisher_at(&circuit, &theta, &mu, 0.4).unwrap();
//! assert!(fi.cfi <= fi.qfi + 1e-8);
//! ```

pub mod circuit;
pub mod estimator;
pub mod fisher;
pub mod gates;
pub mod ghz;
pub mod matrix;
pub mod optimize;
pub mod sampling;
pub mod state;
pub mod tolerance;

pub mod seed;

pub use matrix::ComplexMatrix;
pub use seed::{mix_index, mix_label};
pub use state::QuantumState;
pub use tolerance::Tolerances;

use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex<f64>;

/// Errors surfaced by simulation, dataset, and estimator operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },
    #[error("invalid target qubits {targets:?} for an {n}-qubit state")]
    BadTarget { targets: Vec<usize>, n: usize },
    #[error("Kraus operators violate completeness (max deviation {deviation:.3e})")]
    IncompleteKraus { deviation: f64 },
    #[error("matrix is not hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("invalid size: {0}")]
    BadSize(String),
    #[error("parameter vector has length {got}, expected {expected}")]
    BadLength { got: usize, expected: usize },
    #[error("vector lengths disagree: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid input: {0}")]
    BadInput(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("corrupt file: {0}")]
    CorruptFile(String),
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
