//! End-to-end check of the neural estimator on a single-qubit probe whose
//! likelihood p(0|φ) = cos²(φ/2) is known in closed form. The grid-restricted
//! analytic Bayes posterior is the oracle: the trained network must land near
//! it in bias and variance, and respect the Cramér-Rao band (the CFI of this
//! fringe is exactly 1 at every φ).

use vqs_core::estimator::{bias_variance, train, BayesMode, EstimatorNet, TrainConfig};
use vqs_core::ghz::{ghz_bias_variance, GhzProtocol};
use vqs_core::mix_index;
use vqs_core::sampling::{sample_shots, MeasurementDataset, ShotBlock};

const N_PHI: usize = 100;
const SHOTS_PER_PHI: usize = 1000;

fn fringe_grid() -> Vec<f64> {
    (0..N_PHI)
        .map(|i| std::f64::consts::PI * i as f64 / (N_PHI - 1) as f64)
        .collect()
}

fn fringe_probs(phi: f64) -> [f64; 2] {
    let c = (phi / 2.0).cos().powi(2);
    [c, 1.0 - c]
}

/// Sample the synthetic single-qubit dataset from the analytic likelihood.
fn fringe_dataset(shots_per_phi: usize, seed: u64) -> MeasurementDataset {
    let phis = fringe_grid();
    let mut shots = Vec::with_capacity(phis.len() * shots_per_phi);
    for (p, &phi) in phis.iter().enumerate() {
        let outcomes = sample_shots(&fringe_probs(phi), shots_per_phi, mix_index(seed, p as u64));
        shots.extend(outcomes.into_iter().map(|o| o as u8));
    }
    MeasurementDataset {
        n: 1,
        phis,
        shots_per_phi,
        shots,
        seed,
        provenance: String::new(),
    }
}

fn trained_net() -> (EstimatorNet, Vec<f64>) {
    let ds = fringe_dataset(SHOTS_PER_PHI, 2024);
    let mut net = EstimatorNet::new(1, &[32, 32], ds.phis.clone(), 11).unwrap();
    let main = TrainConfig {
        epochs: 40,
        batch_size: 256,
        lr: 3e-3,
        l2: 1e-6,
        seed: 3,
    };
    let fine = TrainConfig {
        epochs: 20,
        batch_size: 512,
        lr: 3e-4,
        l2: 1e-6,
        seed: 4,
    };
    let mut losses = train(&mut net, &ds, &main).unwrap().loss_per_epoch;
    losses.extend(train(&mut net, &ds, &fine).unwrap().loss_per_epoch);
    (net, losses)
}

#[test]
fn fringe_estimator_matches_analytic_bayes_oracle() {
    let (net, losses) = trained_net();
    let grid = fringe_grid();
    let bin_width = grid[1] - grid[0];

    // Running average of the loss (window 10) must not increase.
    let window = 10;
    let averages: Vec<f64> = losses
        .windows(window)
        .map(|w| w.iter().sum::<f64>() / window as f64)
        .collect();
    for pair in averages.windows(2) {
        assert!(pair[1] <= pair[0] + 1e-6, "loss trend {averages:?}");
    }

    // A "0" outcome favors small phases: posterior mean below the midpoint.
    let post0 = net.forward(&[0]).unwrap();
    let mean0: f64 = post0.iter().zip(&grid).map(|(p, b)| p * b).sum();
    assert!(
        mean0 < std::f64::consts::FRAC_PI_2,
        "posterior mean for outcome 0: {mean0}"
    );

    // Test pool at mid-fringe, disjoint from the training stream by seed.
    let phi_true = std::f64::consts::FRAC_PI_2;
    let m_grid = [1usize, 10, 100, 1000];
    let seqs = 100;
    let pool_outcomes = sample_shots(&fringe_probs(phi_true), 1000 * seqs, 771);
    let pool_bits: Vec<u8> = pool_outcomes.iter().map(|&o| o as u8).collect();
    let pool = ShotBlock::new(1, &pool_bits);
    let report = bias_variance(&net, pool, phi_true, &m_grid, seqs, BayesMode::LogSpace).unwrap();

    // The analytic Bayes posterior over the same grid and the same pool: the
    // single-qubit fringe coincides with the n=1 parity likelihood.
    let proto = GhzProtocol::new(1, 0.0, grid.clone()).unwrap();
    let oracle = ghz_bias_variance(&proto, &pool_bits, phi_true, &m_grid, seqs).unwrap();

    let at = |m: usize, rows: &vqs_core::estimator::EstimateReport| {
        rows.rows.iter().find(|r| r.m == m).unwrap().clone()
    };

    // m=100: bias under one bin, variance in the factor-2 CRB band (CFI = 1).
    let row100 = at(100, &report);
    assert!(
        row100.bias.abs() < bin_width,
        "bias {} vs bin width {bin_width}",
        row100.bias
    );
    let crb = 1.0 / 100.0;
    assert!(
        row100.variance > 0.5 * crb && row100.variance < 2.0 * crb,
        "variance {} outside [{}, {}]",
        row100.variance,
        0.5 * crb,
        2.0 * crb
    );

    // CRB sanity across the unbiased regime.
    for m in [10usize, 100] {
        let row = at(m, &report);
        assert!(
            row.variance >= 0.5 / m as f64,
            "m={m}: variance {} below half the CRB",
            row.variance
        );
    }

    // Variance decreases with sequence length up to m ~ 10³.
    let vars: Vec<f64> = m_grid.iter().map(|&m| at(m, &report).variance).collect();
    assert!(vars[0] > vars[1] && vars[1] > vars[2], "variances {vars:?}");
    assert!(vars[3] < vars[2] * 1.2, "variances {vars:?}");

    // Agreement with the oracle where both are unbiased.
    for m in [10usize, 100] {
        let net_row = at(m, &report);
        let oracle_row = at(m, &oracle);
        assert!(
            (net_row.bias - oracle_row.bias).abs() < 2.0 * bin_width,
            "m={m}: net bias {} vs oracle {}",
            net_row.bias,
            oracle_row.bias
        );
        let ratio = net_row.variance / oracle_row.variance;
        assert!(
            ratio > 0.5 && ratio < 2.0,
            "m={m}: variance ratio {ratio} (net {}, oracle {})",
            net_row.variance,
            oracle_row.variance
        );
    }
}
