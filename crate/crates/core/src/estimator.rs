//! Neural-network phase estimator.
//!
//! A dense feed-forward network maps a raw n-bit measurement outcome to a
//! softmax posterior over w phase bins. It trains on single shots with the
//! cross-entropy loss (plus L2 regularization) under ADAM, and estimates from
//! shot sequences through a Bayesian product of per-shot posteriors,
//! accumulated in log space with log-sum-exp normalization.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::optimize::{adam_step, AdamState};
use crate::sampling::{MeasurementDataset, ShotBlock};
use crate::seed::mix_index;
use crate::{Error, Result};

const CHECKPOINT_MAGIC: &[u8; 4] = b"VQSN";
const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
struct Layer {
    rows: usize,
    cols: usize,
    w: Vec<f64>,
    b: Vec<f64>,
}

impl Layer {
    fn zeroed(rows: usize, cols: usize) -> Self {
        Layer {
            rows,
            cols,
            w: vec![0.0; rows * cols],
            b: vec![0.0; rows],
        }
    }
}

/// Feed-forward estimator: ReLU hidden layers, softmax output, one output bin
/// per training phase.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorNet {
    layer_dims: Vec<usize>,
    layers: Vec<Layer>,
    phi_bins: Vec<f64>,
    seed: u64,
}

impl EstimatorNet {
    /// He-style uniform initialization from the seed.
    pub fn new(input: usize, hidden: &[usize], phi_bins: Vec<f64>, seed: u64) -> Result<Self> {
        let mut net = Self::zeroed(input, hidden, phi_bins)?;
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        for layer in &mut net.layers {
            let limit = (6.0 / layer.cols as f64).sqrt();
            for w in &mut layer.w {
                *w = rng.random_range(-limit..limit);
            }
        }
        net.seed = seed;
        Ok(net)
    }

    /// All-zero parameters; every forward pass is exactly uniform.
    pub fn zeroed(input: usize, hidden: &[usize], phi_bins: Vec<f64>) -> Result<Self> {
        if input == 0 || phi_bins.is_empty() {
            return Err(Error::BadConfig("empty input or output layer".into()));
        }
        if !phi_bins.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::BadConfig("phi bins must be ascending".into()));
        }
        let mut layer_dims = vec![input];
        layer_dims.extend_from_slice(hidden);
        layer_dims.push(phi_bins.len());
        let layers = layer_dims
            .windows(2)
            .map(|d| Layer::zeroed(d[1], d[0]))
            .collect();
        Ok(EstimatorNet {
            layer_dims,
            layers,
            phi_bins,
            seed: 0,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn phi_bins(&self) -> &[f64] {
        &self.phi_bins
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    fn check_shot(&self, shot: &[u8]) -> Result<()> {
        if shot.len() != self.input_dim() {
            return Err(Error::BadInput(format!(
                "shot has {} bits, expected {}",
                shot.len(),
                self.input_dim()
            )));
        }
        if shot.iter().any(|&b| b > 1) {
            return Err(Error::BadInput("shot entries must be 0 or 1".into()));
        }
        Ok(())
    }

    fn logits_unchecked(&self, shot: &[u8]) -> Vec<f64> {
        let mut act: Vec<f64> = shot.iter().map(|&b| b as f64).collect();
        for (li, layer) in self.layers.iter().enumerate() {
            let mut next = layer.b.clone();
            for r in 0..layer.rows {
                let row = &layer.w[r * layer.cols..(r + 1) * layer.cols];
                let mut acc = 0.0;
                for (w, a) in row.iter().zip(&act) {
                    acc += w * a;
                }
                next[r] += acc;
            }
            let last = li + 1 == self.layers.len();
            if !last {
                for v in &mut next {
                    *v = v.max(0.0);
                }
            }
            act = next;
        }
        act
    }

    /// Posterior p(φ̄_j | shot): softmax of the output layer.
    pub fn forward(&self, shot: &[u8]) -> Result<Vec<f64>> {
        Ok(softmax(&self.logits(shot)?))
    }

    /// Log-posterior; the numerically safe input to Bayesian accumulation.
    pub fn log_forward(&self, shot: &[u8]) -> Result<Vec<f64>> {
        Ok(log_softmax(&self.logits(shot)?))
    }

    fn logits(&self, shot: &[u8]) -> Result<Vec<f64>> {
        self.check_shot(shot)?;
        Ok(self.logits_unchecked(shot))
    }

    /// Flattened copy of every parameter, per layer: weights then biases.
    pub fn params(&self) -> Vec<f64> {
        self.flatten()
    }

    /// Replace all parameters from a flattened vector.
    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::LengthMismatch(flat.len(), self.param_count()));
        }
        self.unflatten(flat);
        Ok(())
    }

    fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(&l.w);
            out.extend_from_slice(&l.b);
        }
        out
    }

    fn unflatten(&mut self, flat: &[f64]) {
        let mut pos = 0;
        for l in &mut self.layers {
            let (wn, bn) = (l.w.len(), l.b.len());
            l.w.copy_from_slice(&flat[pos..pos + wn]);
            pos += wn;
            l.b.copy_from_slice(&flat[pos..pos + bn]);
            pos += bn;
        }
        debug_assert_eq!(pos, flat.len());
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&x| (x - max).exp()).sum::<f64>().ln();
    logits.iter().map(|&x| x - lse).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub l2: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 128,
            lr: 1e-3,
            l2: 1e-6,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::BadConfig(
                "epochs and batch_size must be positive".into(),
            ));
        }
        if !(self.lr > 0.0) {
            return Err(Error::BadConfig("learning rate must be positive".into()));
        }
        if self.l2 < 0.0 {
            return Err(Error::BadConfig(
                "l2 coefficient must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Loss curve from a training run: mean objective per epoch.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    pub loss_per_epoch: Vec<f64>,
}

impl TrainReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,loss\n");
        for (e, l) in self.loss_per_epoch.iter().enumerate() {
            out.push_str(&format!("{e},{l}\n"));
        }
        out
    }
}

/// Mean cross-entropy of a batch plus the L2 term, with its gradient over the
/// flattened parameters.
///
/// Shots take at most 2^n distinct values, so the batch is grouped by bit
/// pattern: one forward and one backward pass per pattern, with the output
/// delta aggregated as c·softmax - label_counts. The gradient is exactly the
/// per-sample sum (backpropagation is linear in the output delta once the
/// activations are fixed), at a fraction of the work.
pub fn loss_and_gradient(
    net: &EstimatorNet,
    shots: &[&[u8]],
    labels: &[usize],
    l2: f64,
) -> (f64, Vec<f64>) {
    debug_assert_eq!(shots.len(), labels.len());
    let w_out = net.output_dim();
    // Canonical (sorted) pattern order keeps the f64 summation order fixed
    // regardless of how the batch was shuffled.
    let mut groups: std::collections::BTreeMap<&[u8], Vec<f64>> = std::collections::BTreeMap::new();
    for (&shot, &label) in shots.iter().zip(labels) {
        groups.entry(shot).or_insert_with(|| vec![0.0; w_out])[label] += 1.0;
    }

    let n_layers = net.layers.len();
    let batch = shots.len() as f64;
    let mut grad: Vec<Vec<f64>> = net
        .layers
        .iter()
        .map(|l| vec![0.0; l.w.len() + l.b.len()])
        .collect();
    let mut loss = 0.0;

    for (shot, label_counts) in groups {
        let count: f64 = label_counts.iter().sum();
        // Forward, keeping activations per layer; index 0 is the input.
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(n_layers + 1);
        acts.push(shot.iter().map(|&b| b as f64).collect());
        for (li, layer) in net.layers.iter().enumerate() {
            let prev = &acts[li];
            let mut z = layer.b.clone();
            for r in 0..layer.rows {
                let row = &layer.w[r * layer.cols..(r + 1) * layer.cols];
                let mut acc = 0.0;
                for (w, a) in row.iter().zip(prev) {
                    acc += w * a;
                }
                z[r] += acc;
            }
            if li + 1 != n_layers {
                for v in &mut z {
                    *v = v.max(0.0);
                }
            }
            acts.push(z);
        }
        let log_post = log_softmax(&acts[n_layers]);
        for (j, &c) in label_counts.iter().enumerate() {
            if c > 0.0 {
                loss -= c * log_post[j];
            }
        }

        // Backward with the aggregated output delta Σ (softmax - onehot).
        let mut delta: Vec<f64> = log_post
            .iter()
            .zip(&label_counts)
            .map(|(&lp, &c)| count * lp.exp() - c)
            .collect();
        for li in (0..n_layers).rev() {
            let layer = &net.layers[li];
            let prev = &acts[li];
            let g = &mut grad[li];
            for r in 0..layer.rows {
                let d = delta[r];
                let row = &mut g[r * layer.cols..(r + 1) * layer.cols];
                for (slot, a) in row.iter_mut().zip(prev) {
                    *slot += d * a;
                }
                g[layer.w.len() + r] += d;
            }
            if li > 0 {
                let mut next_delta = vec![0.0; layer.cols];
                for r in 0..layer.rows {
                    let d = delta[r];
                    let row = &layer.w[r * layer.cols..(r + 1) * layer.cols];
                    for (nd, w) in next_delta.iter_mut().zip(row) {
                        *nd += d * w;
                    }
                }
                // ReLU mask: the stored activation is already max(z, 0).
                for (nd, &a) in next_delta.iter_mut().zip(&acts[li]) {
                    if a <= 0.0 {
                        *nd = 0.0;
                    }
                }
                delta = next_delta;
            }
        }
    }

    loss /= batch;
    let mut flat = Vec::with_capacity(net.param_count());
    for (layer, g) in net.layers.iter().zip(&grad) {
        for (i, &w) in layer.w.iter().enumerate() {
            flat.push(g[i] / batch + 2.0 * l2 * w);
        }
        for (r, _) in layer.b.iter().enumerate() {
            flat.push(g[layer.w.len() + r] / batch);
        }
        loss += l2 * layer.w.iter().map(|w| w * w).sum::<f64>();
    }
    (loss, flat)
}

/// Supervised training on single shots labeled by their phase-grid index.
pub fn train(
    net: &mut EstimatorNet,
    dataset: &MeasurementDataset,
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    cfg.validate()?;
    if dataset.n != net.input_dim() {
        return Err(Error::ShapeMismatch(format!(
            "dataset has {} qubits, net expects {}",
            dataset.n,
            net.input_dim()
        )));
    }
    if dataset.n_phi() != net.output_dim() {
        return Err(Error::ShapeMismatch(format!(
            "dataset has {} phases, net has {} output bins",
            dataset.n_phi(),
            net.output_dim()
        )));
    }

    let mut order: Vec<(usize, usize)> = (0..dataset.n_phi())
        .flat_map(|p| (0..dataset.shots_per_phi).map(move |s| (p, s)))
        .collect();
    let mut flat = net.flatten();
    let mut adam = AdamState::new(flat.len(), cfg.lr);
    let mut report = TrainReport::default();

    for epoch in 0..cfg.epochs {
        let mut rng = ChaCha12Rng::seed_from_u64(mix_index(cfg.seed, epoch as u64));
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let shots: Vec<&[u8]> = chunk.iter().map(|&(p, s)| dataset.shot(p, s)).collect();
            let labels: Vec<usize> = chunk.iter().map(|&(p, _)| p).collect();
            let (loss, grad) = loss_and_gradient(net, &shots, &labels, cfg.l2);
            epoch_loss += loss * chunk.len() as f64;
            let (next_adam, next_flat) = adam_step(&adam, &flat, &grad, false)?;
            adam = next_adam;
            flat = next_flat;
            net.unflatten(&flat);
        }
        report.loss_per_epoch.push(epoch_loss / order.len() as f64);
    }
    Ok(report)
}

/// How sequence posteriors are accumulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BayesMode {
    /// Sum of log-posteriors with log-sum-exp normalization (default).
    LogSpace,
    /// Literal running product with one final normalization. Underflows for
    /// long sequences; kept to make that failure mode reproducible.
    RawProduct,
}

/// Incremental log-space Bayesian update over a shot sequence.
#[derive(Debug, Clone)]
pub struct BayesAccumulator {
    log_post: Vec<f64>,
}

impl BayesAccumulator {
    /// Uniform prior over w bins.
    pub fn new(w: usize) -> Self {
        BayesAccumulator {
            log_post: vec![0.0; w],
        }
    }

    pub fn update(&mut self, net: &EstimatorNet, shot: &[u8]) -> Result<()> {
        let lp = net.log_forward(shot)?;
        for (acc, l) in self.log_post.iter_mut().zip(&lp) {
            *acc += l;
        }
        Ok(())
    }

    /// Normalized posterior; safe for sequences far beyond m ~ 10³.
    pub fn posterior(&self) -> Vec<f64> {
        normalize_log(&self.log_post)
    }
}

pub(crate) fn normalize_log(log_post: &[f64]) -> Vec<f64> {
    let max = log_post.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return vec![1.0 / log_post.len() as f64; log_post.len()];
    }
    let exps: Vec<f64> = log_post.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Combine per-shot posteriors into the sequence posterior (log-space).
pub fn combine_posteriors(posteriors: &[Vec<f64>]) -> Vec<f64> {
    assert!(!posteriors.is_empty(), "need at least one posterior");
    let w = posteriors[0].len();
    let mut log_post = vec![0.0; w];
    for p in posteriors {
        for (acc, &v) in log_post.iter_mut().zip(p) {
            *acc += v.ln();
        }
    }
    normalize_log(&log_post)
}

/// Sequence posterior from m shots (m ≥ 1).
pub fn bayes_posterior(net: &EstimatorNet, shots: &[&[u8]]) -> Result<Vec<f64>> {
    bayes_posterior_mode(net, shots, BayesMode::LogSpace)
}

pub fn bayes_posterior_mode(
    net: &EstimatorNet,
    shots: &[&[u8]],
    mode: BayesMode,
) -> Result<Vec<f64>> {
    assert!(!shots.is_empty(), "sequence must contain at least one shot");
    match mode {
        BayesMode::LogSpace => {
            let mut acc = BayesAccumulator::new(net.output_dim());
            for shot in shots {
                acc.update(net, shot)?;
            }
            Ok(acc.posterior())
        }
        BayesMode::RawProduct => {
            let mut post = vec![1.0; net.output_dim()];
            for shot in shots {
                let p = net.forward(shot)?;
                for (acc, v) in post.iter_mut().zip(&p) {
                    *acc *= v;
                }
            }
            let sum: f64 = post.iter().sum();
            if sum > 0.0 && sum.is_finite() {
                for v in &mut post {
                    *v /= sum;
                }
            }
            Ok(post)
        }
    }
}

/// Argmax estimate; exact ties resolve to the lowest bin index.
pub fn estimate(posterior: &[f64], phi_bins: &[f64]) -> f64 {
    debug_assert_eq!(posterior.len(), phi_bins.len());
    let mut best = 0;
    for (i, &p) in posterior.iter().enumerate() {
        if p > posterior[best] {
            best = i;
        }
    }
    phi_bins[best]
}

/// Posterior variance around a point estimate: Σ_j p_j (φ̄_j - φ̄)².
pub fn posterior_variance(posterior: &[f64], phi_bins: &[f64], phi_bar: f64) -> f64 {
    posterior
        .iter()
        .zip(phi_bins)
        .map(|(&p, &b)| p * (b - phi_bar) * (b - phi_bar))
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRow {
    pub phi_true: f64,
    pub m: usize,
    pub n_sequences: usize,
    /// Mean of (φ̂ - φ_true) over the evaluated sequences.
    pub bias: f64,
    /// Mean posterior variance around the estimate (primary, per Δ²φ̄).
    pub variance: f64,
    /// Mean squared error (φ̂ - φ_true)² (secondary column).
    pub sq_error: f64,
    /// Posterior of the first evaluated sequence, for inspection.
    pub posterior_snapshot: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EstimateReport {
    pub rows: Vec<EstimateRow>,
}

impl EstimateReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("phi_true,m,n_sequences,bias,variance,sq_error\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.phi_true, r.m, r.n_sequences, r.bias, r.variance, r.sq_error
            ));
        }
        out
    }
}

/// Bias and variance of the sequence estimator at each m, evaluated on
/// disjoint chunks of a test shot pool drawn at φ_true.
pub fn bias_variance(
    net: &EstimatorNet,
    pool: ShotBlock<'_>,
    phi_true: f64,
    m_grid: &[usize],
    max_sequences: usize,
    mode: BayesMode,
) -> Result<EstimateReport> {
    if pool.n() != net.input_dim() {
        return Err(Error::ShapeMismatch(format!(
            "pool has {}-bit shots, net expects {}",
            pool.n(),
            net.input_dim()
        )));
    }
    let bins = net.phi_bins().to_vec();
    let w = bins.len();

    // Shots take at most 2^n distinct values; evaluate the network once per
    // pattern and replay sequences as pattern counts (log-space mode only;
    // the raw mode keeps its literal shot-by-shot product).
    let mut pattern_ids: std::collections::BTreeMap<&[u8], usize> =
        std::collections::BTreeMap::new();
    let mut pool_ids = Vec::with_capacity(pool.len());
    for row in pool.rows() {
        let next = pattern_ids.len();
        let id = *pattern_ids.entry(row).or_insert(next);
        pool_ids.push(id);
    }
    let mut pattern_log_posts = vec![Vec::new(); pattern_ids.len()];
    for (row, &id) in pattern_ids.iter() {
        pattern_log_posts[id] = net.log_forward(row)?;
    }

    let mut report = EstimateReport::default();
    for &m in m_grid {
        if m == 0 {
            return Err(Error::BadConfig(
                "sequence length m must be positive".into(),
            ));
        }
        let n_seq = (pool.len() / m).min(max_sequences);
        if n_seq == 0 {
            return Err(Error::ShapeMismatch(format!(
                "pool of {} shots cannot form a sequence of length {m}",
                pool.len()
            )));
        }
        let mut bias_acc = 0.0;
        let mut var_acc = 0.0;
        let mut sq_acc = 0.0;
        let mut snapshot = Vec::new();
        let mut counts = vec![0.0f64; pattern_log_posts.len()];
        for s in 0..n_seq {
            let post = match mode {
                BayesMode::LogSpace => {
                    counts.iter_mut().for_each(|c| *c = 0.0);
                    for k in 0..m {
                        counts[pool_ids[s * m + k]] += 1.0;
                    }
                    let mut log_post = vec![0.0f64; w];
                    for (pid, &c) in counts.iter().enumerate() {
                        if c > 0.0 {
                            for (acc, &lp) in log_post.iter_mut().zip(&pattern_log_posts[pid]) {
                                *acc += c * lp;
                            }
                        }
                    }
                    normalize_log(&log_post)
                }
                BayesMode::RawProduct => {
                    let shots: Vec<&[u8]> = (0..m).map(|k| pool.row(s * m + k)).collect();
                    bayes_posterior_mode(net, &shots, mode)?
                }
            };
            let phi_bar = estimate(&post, &bins);
            bias_acc += phi_bar - phi_true;
            var_acc += posterior_variance(&post, &bins, phi_bar);
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

/// Serialize a net checkpoint: dims, φ bins, weights, and a config echo.
pub fn net_to_bytes(net: &EstimatorNet, config_echo: &str) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(net.layer_dims.len() as u32).to_le_bytes());
    for &d in &net.layer_dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    out.extend_from_slice(&net.seed.to_le_bytes());
    for &b in &net.phi_bins {
        out.extend_from_slice(&b.to_le_bytes());
    }
    for layer in &net.layers {
        for &w in layer.w.iter().chain(&layer.b) {
            out.extend_from_slice(&w.to_le_bytes());
        }
    }
    let echo = config_echo.as_bytes();
    out.extend_from_slice(&(echo.len() as u32).to_le_bytes());
    out.extend_from_slice(echo);
    out
}

pub fn net_from_bytes(bytes: &[u8]) -> Result<(EstimatorNet, String)> {
    let corrupt = |msg: &str| Error::CorruptFile(format!("vqsn: {msg}"));
    let mut pos = 0usize;
    let take = |pos: &mut usize, len: usize| -> Result<&[u8]> {
        if *pos + len > bytes.len() {
            return Err(corrupt("truncated"));
        }
        let out = &bytes[*pos..*pos + len];
        *pos += len;
        Ok(out)
    };
    if take(&mut pos, 4)? != CHECKPOINT_MAGIC {
        return Err(corrupt("bad magic"));
    }
    let u32_at = |b: &[u8]| u32::from_le_bytes(b.try_into().unwrap());
    if u32_at(take(&mut pos, 4)?) != CHECKPOINT_VERSION {
        return Err(corrupt("unsupported version"));
    }
    let n_dims = u32_at(take(&mut pos, 4)?) as usize;
    if n_dims < 2 || n_dims > 64 {
        return Err(corrupt("implausible layer count"));
    }
    let mut layer_dims = Vec::with_capacity(n_dims);
    for _ in 0..n_dims {
        layer_dims.push(u32_at(take(&mut pos, 4)?) as usize);
    }
    let seed = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
    let w = *layer_dims.last().unwrap();
    let mut phi_bins = Vec::with_capacity(w);
    for _ in 0..w {
        phi_bins.push(f64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()));
    }
    let mut layers = Vec::with_capacity(n_dims - 1);
    for d in layer_dims.windows(2) {
        let mut layer = Layer::zeroed(d[1], d[0]);
        for slot in layer.w.iter_mut().chain(layer.b.iter_mut()) {
            *slot = f64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
        }
        layers.push(layer);
    }
    let echo_len = u32_at(take(&mut pos, 4)?) as usize;
    let echo = String::from_utf8(take(&mut pos, echo_len)?.to_vec())
        .map_err(|_| corrupt("config echo is not utf-8"))?;
    if pos != bytes.len() {
        return Err(corrupt("trailing bytes"));
    }
    Ok((
        EstimatorNet {
            layer_dims,
            layers,
            phi_bins,
            seed,
        },
        echo,
    ))
}

pub fn save_net(net: &EstimatorNet, config_echo: &str, path: &Path) -> Result<()> {
    fs::write(path, net_to_bytes(net, config_echo))?;
    Ok(())
}

pub fn load_net(path: &Path) -> Result<(EstimatorNet, String)> {
    net_from_bytes(&fs::read(path)?)
}
