//! Fisher-information ascent over the circuit parameters (θ, μ).
//!
//! Gradients over the variational parameters use central finite differences
//! with step 1e-4; the inner φ derivative stays analytic. ADAM (sign-flipped
//! for ascent) advances the parameters, the best-seen iterate is returned, and
//! a plateau rule stops runs whose best objective has stalled.

use rayon::prelude::*;

use crate::circuit::{prepare, SensorCircuit};
use crate::fisher::{cfi_at, fisher_at, qfi_at, FisherResult};
use crate::seed::{fnv1a, mix_index};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

const FD_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Cfi,
    Qfi,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::Cfi => "cfi",
            Objective::Qfi => "qfi",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "cfi" => Some(Objective::Cfi),
            "qfi" => Some(Objective::Qfi),
            _ => None,
        }
    }
}

/// ADAM moment buffers plus hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(dim: usize, lr: f64) -> Self {
        AdamState {
            step: 0,
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// One ADAM update with bias correction; `maximize` adds the step instead of
/// subtracting it.
pub fn adam_step(
    state: &AdamState,
    params: &[f64],
    grad: &[f64],
    maximize: bool,
) -> Result<(AdamState, Vec<f64>)> {
    if params.len() != grad.len() {
        return Err(Error::LengthMismatch(params.len(), grad.len()));
    }
    if params.len() != state.m.len() {
        return Err(Error::LengthMismatch(params.len(), state.m.len()));
    }
    let mut next = state.clone();
    next.step += 1;
    let t = next.step as i32;
    let bc1 = 1.0 - next.beta1.powi(t);
    let bc2 = 1.0 - next.beta2.powi(t);
    let mut out = params.to_vec();
    for i in 0..params.len() {
        next.m[i] = next.beta1 * next.m[i] + (1.0 - next.beta1) * grad[i];
        next.v[i] = next.beta2 * next.v[i] + (1.0 - next.beta2) * grad[i] * grad[i];
        let m_hat = next.m[i] / bc1;
        let v_hat = next.v[i] / bc2;
        let update = next.lr * m_hat / (v_hat.sqrt() + next.eps);
        if maximize {
            out[i] += update;
        } else {
            out[i] -= update;
        }
    }
    Ok((next, out))
}

/// Value of the optimization objective at one parameter point.
pub fn objective_value(
    circuit: &SensorCircuit,
    theta: &[f64],
    mu: &[f64],
    phi: f64,
    objective: Objective,
) -> Result<f64> {
    let prepared = prepare(circuit, theta)?;
    match objective {
        Objective::Cfi => cfi_at(&prepared, circuit, mu, phi),
        Objective::Qfi => qfi_at(&prepared, phi),
    }
}

/// Gradient of the objective split into its θ and μ parts.
///
/// The QFI does not depend on μ, so its μ block is identically zero and is
/// never evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub theta: Vec<f64>,
    pub mu: Vec<f64>,
}

pub fn grad_objective(
    circuit: &SensorCircuit,
    theta: &[f64],
    mu: &[f64],
    phi_eval: f64,
    objective: Objective,
) -> Result<Gradient> {
    if theta.len() != circuit.n_theta() {
        return Err(Error::BadLength {
            got: theta.len(),
            expected: circuit.n_theta(),
        });
    }
    if mu.len() != circuit.n_mu() {
        return Err(Error::BadLength {
            got: mu.len(),
            expected: circuit.n_mu(),
        });
    }
    let n_theta = theta.len();
    let differentiated = match objective {
        Objective::Cfi => n_theta + mu.len(),
        Objective::Qfi => n_theta,
    };
    let grad: Vec<f64> = (0..differentiated)
        .into_par_iter()
        .map(|i| {
            let mut th = theta.to_vec();
            let mut m = mu.to_vec();
            {
                let slot = if i < n_theta {
                    &mut th[i]
                } else {
                    &mut m[i - n_theta]
                };
                *slot += FD_STEP;
            }
            let plus = objective_value(circuit, &th, &m, phi_eval, objective)?;
            {
                let slot = if i < n_theta {
                    &mut th[i]
                } else {
                    &mut m[i - n_theta]
                };
                *slot -= 2.0 * FD_STEP;
            }
            let minus = objective_value(circuit, &th, &m, phi_eval, objective)?;
            Ok((plus - minus) / (2.0 * FD_STEP))
        })
        .collect::<Result<_>>()?;
    Ok(Gradient {
        theta: grad[..n_theta].to_vec(),
        mu: match objective {
            Objective::Cfi => grad[n_theta..].to_vec(),
            Objective::Qfi => vec![0.0; mu.len()],
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub cfi: f64,
    pub qfi: f64,
    pub params_hash: u64,
}

/// Per-iteration record of both Fisher quantities.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OptimizationTrace {
    pub records: Vec<TraceRecord>,
}

impl OptimizationTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,cfi,qfi\n");
        for r in &self.records {
            out.push_str(&format!("{},{},{}\n", r.iteration, r.cfi, r.qfi));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeConfig {
    pub iterations: usize,
    pub lr: f64,
    pub objective: Objective,
    /// Evaluation phase; defaults to π/(2n) when unset.
    pub phi_eval: Option<f64>,
    pub seed: u64,
    pub restarts: usize,
    pub plateau_window: usize,
    pub plateau_rel_tol: f64,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            iterations: 1500,
            lr: 0.08,
            objective: Objective::Cfi,
            phi_eval: None,
            seed: 0,
            restarts: 5,
            plateau_window: 100,
            plateau_rel_tol: 1e-5,
        }
    }
}

pub fn default_phi_eval(n: usize) -> f64 {
    std::f64::consts::PI / (2.0 * n as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOutcome {
    pub theta: Vec<f64>,
    pub mu: Vec<f64>,
    pub best_objective: f64,
    pub best_iteration: usize,
    pub restart_index: usize,
    pub trace: OptimizationTrace,
}

fn hash_params(theta: &[f64], mu: &[f64]) -> u64 {
    let mut bytes = Vec::with_capacity(8 * (theta.len() + mu.len()));
    for v in theta.iter().chain(mu.iter()) {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fnv1a(&bytes)
}

/// Run a single ascent from the given starting point, returning the best-seen
/// parameters (the raw objective trajectory is not monotone).
pub fn optimize_sensor(
    circuit: &SensorCircuit,
    init_theta: &[f64],
    init_mu: &[f64],
    config: &OptimizeConfig,
) -> Result<OptimizeOutcome> {
    if config.iterations == 0 {
        return Err(Error::BadConfig("iterations must be at least 1".into()));
    }
    let phi = config
        .phi_eval
        .unwrap_or_else(|| default_phi_eval(circuit.n()));
    let mut theta = init_theta.to_vec();
    let mut mu = init_mu.to_vec();
    let mut adam = AdamState::new(theta.len() + mu.len(), config.lr);
    let mut trace = OptimizationTrace::default();
    let mut best_theta = theta.clone();
    let mut best_mu = mu.clone();
    let mut best_obj = f64::NEG_INFINITY;
    let mut best_iter = 0;
    let mut best_history: Vec<f64> = Vec::with_capacity(config.iterations);

    for it in 0..config.iterations {
        let FisherResult { cfi, qfi, .. } = fisher_at(circuit, &theta, &mu, phi)?;
        trace.records.push(TraceRecord {
            iteration: it,
            cfi,
            qfi,
            params_hash: hash_params(&theta, &mu),
        });
        let obj = match config.objective {
            Objective::Cfi => cfi,
            Objective::Qfi => qfi,
        };
        if obj > best_obj {
            best_obj = obj;
            best_theta.copy_from_slice(&theta);
            best_mu.copy_from_slice(&mu);
            best_iter = it;
        }
        best_history.push(best_obj);

        if config.plateau_window > 0 && it + 1 > config.plateau_window {
            let back = best_history[it - config.plateau_window];
            let rel = (best_obj - back) / back.abs().max(1e-12);
            if rel < config.plateau_rel_tol {
                break;
            }
        }
        if it + 1 == config.iterations {
            break;
        }

        let grad = grad_objective(circuit, &theta, &mu, phi, config.objective)?;
        let flat_grad: Vec<f64> = grad.theta.iter().chain(grad.mu.iter()).copied().collect();
        let flat_params: Vec<f64> = theta.iter().chain(mu.iter()).copied().collect();
        let (next_adam, next_params) = adam_step(&adam, &flat_params, &flat_grad, true)?;
        adam = next_adam;
        let split = theta.len();
        theta.copy_from_slice(&next_params[..split]);
        mu.copy_from_slice(&next_params[split..]);
    }

    Ok(OptimizeOutcome {
        theta: best_theta,
        mu: best_mu,
        best_objective: best_obj,
        best_iteration: best_iter,
        restart_index: 0,
        trace,
    })
}

/// Uniform(-π, π) starting point drawn from a seed.
pub fn random_start(circuit: &SensorCircuit, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let pi = std::f64::consts::PI;
    let theta = (0..circuit.n_theta())
        .map(|_| rng.random_range(-pi..pi))
        .collect();
    let mu = (0..circuit.n_mu())
        .map(|_| rng.random_range(-pi..pi))
        .collect();
    (theta, mu)
}

/// Multi-restart ascent: independent random starts, best outcome kept.
/// Restarts run concurrently; ties resolve to the lowest restart index.
pub fn optimize_restarts(
    circuit: &SensorCircuit,
    config: &OptimizeConfig,
) -> Result<OptimizeOutcome> {
    if config.restarts == 0 {
        return Err(Error::BadConfig("restarts must be at least 1".into()));
    }
    let outcomes: Vec<OptimizeOutcome> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let (theta, mu) = random_start(circuit, mix_index(config.seed, r as u64));
            optimize_sensor(circuit, &theta, &mu, config)
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate() {
        if o.best_objective > outcomes[best].best_objective {
            best = i;
        }
    }
    let mut outcome = outcomes.into_iter().nth(best).expect("nonempty restarts");
    outcome.restart_index = best;
    Ok(outcome)
}
