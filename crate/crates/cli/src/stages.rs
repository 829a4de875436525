//! Stage implementations. Each stage reads the validated config plus the
//! artifacts of upstream stages, and writes its own artifacts into the run
//! directory. Reruns with identical config and seed are byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use vqs_core::circuit::{build_ansatz, SensorCircuit};
use vqs_core::estimator::{
    bias_variance, load_net, save_net, train, EstimateReport, EstimatorNet, TrainConfig,
};
use vqs_core::fisher::fisher_at;
use vqs_core::ghz::{ghz_bias_variance, ghz_parity_cfi, ghz_parity_pool, GhzProtocol};
use vqs_core::mix_label;
use vqs_core::optimize::{optimize_restarts, optimize_sensor, OptimizeConfig, OptimizeOutcome};
use vqs_core::sampling::{
    generate_dataset, generate_dataset_at, load_dataset, save_dataset, MeasurementDataset,
    PhaseGrid,
};
use vqs_core::seed::mix_index;

use crate::config::RunConfig;
use crate::CliError;

pub const CIRCUIT_FILE: &str = "circuit.txt";
pub const DEVICE_FILE: &str = "device.toml";
pub const TRACE_FILE: &str = "trace.csv";
pub const TRAIN_DATA_FILE: &str = "train.vqsd";
pub const TEST_DATA_FILE: &str = "test.vqsd";
pub const NET_FILE: &str = "estimator.vqsn";
pub const LOSS_FILE: &str = "loss.csv";
pub const BENCHMARK_FILE: &str = "benchmark.csv";
pub const COMPARE_FILE: &str = "compare_ghz.csv";

/// Optimized-device artifact: the tuned parameters plus their headline
/// Fisher numbers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeviceFile {
    pub config_hash: String,
    pub ansatz: String,
    pub n: usize,
    pub d: usize,
    pub gamma: f64,
    pub objective: String,
    pub phi_eval: f64,
    pub best_cfi: f64,
    pub best_qfi: f64,
    pub best_iteration: usize,
    pub restart_index: usize,
    pub theta: Vec<f64>,
    pub mu: Vec<f64>,
}

pub struct StageContext {
    pub config: RunConfig,
    pub out_dir: PathBuf,
    pub config_hash: String,
    /// Overrides the derived seed of the invoked stage when set.
    pub stage_seed_override: Option<u64>,
    pub force: bool,
}

impl StageContext {
    pub fn new(config: RunConfig, stage_seed_override: Option<u64>, force: bool) -> Self {
        let out_dir = PathBuf::from(&config.run.out_dir);
        let config_hash = config.hash();
        StageContext {
            config,
            out_dir,
            config_hash,
            stage_seed_override,
            force,
        }
    }

    fn stage_seed(&self, stage: &str) -> u64 {
        self.stage_seed_override
            .unwrap_or_else(|| mix_label(self.config.run.seed, stage))
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn require(&self, name: &str) -> Result<PathBuf, CliError> {
        let p = self.path(name);
        if p.exists() {
            Ok(p)
        } else {
            Err(CliError::MissingArtifact(format!(
                "{} not found in {}; run the upstream stage first",
                name,
                self.out_dir.display()
            )))
        }
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        fs::create_dir_all(&self.out_dir)?;
        fs::write(self.path(name), bytes)?;
        Ok(())
    }

    fn check_hash(&self, embedded: &str, what: &str) -> Result<(), CliError> {
        if embedded != self.config_hash {
            let msg = format!(
                "{what} was produced under config {embedded}, current is {}",
                self.config_hash
            );
            if self.force {
                eprintln!("warning: {msg} (continuing under --force)");
            } else {
                return Err(CliError::Config(format!(
                    "{msg}; rerun upstream stages or pass --force"
                )));
            }
        }
        Ok(())
    }

    fn circuit(&self) -> Result<SensorCircuit, CliError> {
        build_ansatz(
            self.config.ansatz(),
            self.config.circuit.n,
            self.config.circuit.d,
            self.config.circuit.gamma,
        )
        .map_err(CliError::from)
    }

    fn csv_with_hash(&self, body: &str) -> String {
        format!("# config={}\n{body}", self.config_hash)
    }

    fn load_device(&self) -> Result<(DeviceFile, SensorCircuit), CliError> {
        let device_text = fs::read_to_string(self.require(DEVICE_FILE)?)?;
        let device: DeviceFile = toml::from_str(&device_text)
            .map_err(|e| CliError::Config(format!("{DEVICE_FILE} parse: {e}")))?;
        self.check_hash(&device.config_hash, DEVICE_FILE)?;
        let circuit_text = fs::read_to_string(self.require(CIRCUIT_FILE)?)?;
        let circuit = SensorCircuit::from_blueprint(&circuit_text)?;
        Ok((device, circuit))
    }
}

/// optimize: tune (θ, μ), write the blueprint, device file, and trace CSV.
pub fn run_optimize(ctx: &StageContext) -> Result<(), CliError> {
    let circuit = ctx.circuit()?;
    let cfg = &ctx.config;
    let opt = OptimizeConfig {
        iterations: cfg.optimize.iterations,
        lr: cfg.optimize.learning_rate,
        objective: cfg.objective(),
        phi_eval: Some(cfg.phi_eval()),
        seed: ctx.stage_seed("optimize"),
        restarts: cfg.optimize.restarts,
        plateau_window: cfg.optimize.plateau_window,
        plateau_rel_tol: cfg.optimize.plateau_rel_tol,
    };
    let outcome = optimize_restarts(&circuit, &opt)?;
    write_device(ctx, &circuit, &outcome, cfg.phi_eval())?;
    println!(
        "optimize: best {} = {:.6} (restart {}, iteration {})",
        cfg.optimize.objective,
        outcome.best_objective,
        outcome.restart_index,
        outcome.best_iteration
    );
    Ok(())
}

fn write_device(
    ctx: &StageContext,
    circuit: &SensorCircuit,
    outcome: &OptimizeOutcome,
    phi_eval: f64,
) -> Result<(), CliError> {
    let fi = fisher_at(circuit, &outcome.theta, &outcome.mu, phi_eval)?;
    let device = DeviceFile {
        config_hash: ctx.config_hash.clone(),
        ansatz: ctx.config.circuit.ansatz.clone(),
        n: ctx.config.circuit.n,
        d: ctx.config.circuit.d,
        gamma: ctx.config.circuit.gamma,
        objective: ctx.config.optimize.objective.clone(),
        phi_eval,
        best_cfi: fi.cfi,
        best_qfi: fi.qfi,
        best_iteration: outcome.best_iteration,
        restart_index: outcome.restart_index,
        theta: outcome.theta.clone(),
        mu: outcome.mu.clone(),
    };
    let device_text =
        toml::to_string(&device).map_err(|e| CliError::Config(format!("device encode: {e}")))?;
    ctx.write(CIRCUIT_FILE, circuit.to_blueprint().as_bytes())?;
    ctx.write(DEVICE_FILE, device_text.as_bytes())?;
    ctx.write(
        TRACE_FILE,
        ctx.csv_with_hash(&outcome.trace.to_csv()).as_bytes(),
    )?;
    Ok(())
}

/// sample: draw the training dataset over the grid and the benchmark test
/// pool at the φ_true list, under independent stage seeds.
pub fn run_sample(ctx: &StageContext) -> Result<(), CliError> {
    let (device, circuit) = ctx.load_device()?;
    let cfg = &ctx.config;
    let grid = PhaseGrid {
        phi_min: cfg.grid.phi_min,
        phi_max: cfg.phi_max(),
        n_phi: cfg.grid.n_phi,
    };
    let train_ds = generate_dataset(
        &circuit,
        &device.theta,
        &device.mu,
        &grid,
        cfg.sampling.shots_per_phi,
        ctx.stage_seed("sample-train"),
    )?;
    save_dataset(&train_ds, &ctx.path(TRAIN_DATA_FILE))?;

    let pool_size = cfg.benchmark.sequences * cfg.benchmark.m_grid.iter().max().copied().unwrap();
    let test_ds = generate_dataset_at(
        &circuit,
        &device.theta,
        &device.mu,
        &cfg.benchmark_phis(),
        pool_size,
        ctx.stage_seed("sample-test"),
    )?;
    save_dataset(&test_ds, &ctx.path(TEST_DATA_FILE))?;
    println!(
        "sample: train shape {:?}, test shape {:?}",
        train_ds.shape(),
        test_ds.shape()
    );
    Ok(())
}

fn train_two_stage(
    net: &mut EstimatorNet,
    ds: &MeasurementDataset,
    cfg: &RunConfig,
    seed: u64,
) -> Result<Vec<f64>, CliError> {
    let est = &cfg.estimator;
    let main = TrainConfig {
        epochs: est.epochs,
        batch_size: est.batch_size,
        lr: est.learning_rate,
        l2: est.l2,
        seed,
    };
    let mut losses = train(net, ds, &main)?.loss_per_epoch;
    if est.fine_tune_epochs > 0 {
        let fine = TrainConfig {
            epochs: est.fine_tune_epochs,
            batch_size: est.batch_size,
            lr: est.learning_rate / 10.0,
            l2: est.l2,
            seed: mix_index(seed, 1),
        };
        losses.extend(train(net, ds, &fine)?.loss_per_epoch);
    }
    Ok(losses)
}

/// train: fit the estimator on the training dataset, write the checkpoint
/// and the loss curve.
pub fn run_train(ctx: &StageContext) -> Result<(), CliError> {
    let (device, circuit) = ctx.load_device()?;
    let train_ds = load_dataset(&ctx.path(TRAIN_DATA_FILE)).map_err(|e| match e {
        vqs_core::Error::Io(_) => CliError::MissingArtifact(format!(
            "{TRAIN_DATA_FILE} not found in {}; run `sample` first",
            ctx.out_dir.display()
        )),
        other => CliError::from(other),
    })?;
    if !train_ds.provenance_matches(&circuit, &device.theta, &device.mu) {
        eprintln!("warning: {TRAIN_DATA_FILE} provenance does not match the optimized device");
    }
    let cfg = &ctx.config;
    let seed = ctx.stage_seed("train");
    let mut net = EstimatorNet::new(
        train_ds.n,
        &cfg.estimator.hidden,
        train_ds.phis.clone(),
        seed,
    )?;
    let losses = train_two_stage(&mut net, &train_ds, cfg, seed)?;
    let echo = format!(
        "config={}\nepochs={}\nbatch_size={}\nlearning_rate={}\nl2={}\nfine_tune_epochs={}\nseed={}\n",
        ctx.config_hash,
        cfg.estimator.epochs,
        cfg.estimator.batch_size,
        cfg.estimator.learning_rate,
        cfg.estimator.l2,
        cfg.estimator.fine_tune_epochs,
        seed,
    );
    save_net(&net, &echo, &ctx.path(NET_FILE))?;
    let mut loss_csv = String::from("epoch,loss\n");
    for (e, l) in losses.iter().enumerate() {
        loss_csv.push_str(&format!("{e},{l}\n"));
    }
    ctx.write(LOSS_FILE, ctx.csv_with_hash(&loss_csv).as_bytes())?;
    println!(
        "train: {} epochs, final loss {:.6}",
        losses.len(),
        losses.last().unwrap()
    );
    Ok(())
}

fn report_csv_rows(report: &EstimateReport) -> String {
    let mut out = String::new();
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.phi_true, r.m, r.n_sequences, r.bias, r.variance, r.sq_error
        ));
    }
    out
}

/// benchmark: evaluate estimator bias/variance on the test pool.
pub fn run_benchmark(ctx: &StageContext) -> Result<(), CliError> {
    let (device, circuit) = ctx.load_device()?;
    let (net, echo) = load_net(&ctx.path(NET_FILE)).map_err(|e| match e {
        vqs_core::Error::Io(_) => CliError::MissingArtifact(format!(
            "{NET_FILE} not found in {}; run `train` first",
            ctx.out_dir.display()
        )),
        other => CliError::from(other),
    })?;
    if let Some(line) = echo.lines().find(|l| l.starts_with("config=")) {
        ctx.check_hash(line.trim_start_matches("config="), NET_FILE)?;
    }
    let test_ds = load_dataset(&ctx.path(TEST_DATA_FILE)).map_err(|e| match e {
        vqs_core::Error::Io(_) => CliError::MissingArtifact(format!(
            "{TEST_DATA_FILE} not found in {}; run `sample` first",
            ctx.out_dir.display()
        )),
        other => CliError::from(other),
    })?;
    if !test_ds.provenance_matches(&circuit, &device.theta, &device.mu) {
        eprintln!("warning: {TEST_DATA_FILE} provenance does not match the optimized device");
    }
    let cfg = &ctx.config;
    let mut body = String::from("phi_true,m,n_sequences,bias,variance,sq_error\n");
    for (p, &phi_true) in test_ds.phis.iter().enumerate() {
        let report = bias_variance(
            &net,
            test_ds.block(p),
            phi_true,
            &cfg.benchmark.m_grid,
            cfg.benchmark.sequences,
            cfg.bayes_mode(),
        )?;
        body.push_str(&report_csv_rows(&report));
    }
    ctx.write(BENCHMARK_FILE, ctx.csv_with_hash(&body).as_bytes())?;
    println!("benchmark: wrote {BENCHMARK_FILE}");
    Ok(())
}

/// compare-ghz: per γ, optimize the noisy device (warm-started along the
/// sweep), train an estimator on its data, and benchmark it against the GHZ
/// parity MLE on pools drawn with identical seeds and φ values.
pub fn run_compare_ghz(ctx: &StageContext) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let n = cfg.circuit.n;
    let phi_true = cfg.compare_phi();
    let m = cfg.compare_ghz.m;
    let sequences = cfg.compare_ghz.sequences;
    let grid = PhaseGrid {
        phi_min: cfg.grid.phi_min,
        phi_max: cfg.phi_max(),
        n_phi: cfg.grid.n_phi,
    };
    let opt_seed = ctx.stage_seed("compare-optimize");
    let data_seed = ctx.stage_seed("compare-data");
    let test_seed = ctx.stage_seed("compare-test");
    let train_seed = ctx.stage_seed("compare-train");

    let mut body =
        String::from("gamma,protocol,cfi,phi_true,m,n_sequences,bias,variance,sq_error\n");
    let mut warm: Option<(Vec<f64>, Vec<f64>)> = None;

    for (gi, &gamma) in cfg.compare_ghz.gammas.iter().enumerate() {
        let circuit = build_ansatz(cfg.ansatz(), n, cfg.circuit.d, gamma)?;
        let opt = OptimizeConfig {
            iterations: if gi == 0 {
                cfg.compare_ghz.iterations_gamma0
            } else {
                cfg.compare_ghz.iterations_warm
            },
            lr: cfg.optimize.learning_rate,
            objective: cfg.objective(),
            phi_eval: Some(cfg.phi_eval()),
            seed: mix_index(opt_seed, gi as u64),
            restarts: cfg.compare_ghz.restarts_gamma0,
            plateau_window: cfg.optimize.plateau_window,
            plateau_rel_tol: cfg.optimize.plateau_rel_tol,
        };
        let outcome = match &warm {
            None => optimize_restarts(&circuit, &opt)?,
            Some((theta, mu)) => optimize_sensor(&circuit, theta, mu, &opt)?,
        };
        warm = Some((outcome.theta.clone(), outcome.mu.clone()));

        // VQS side: train on data from this noisy device, benchmark on a
        // fresh pool.
        let train_ds = generate_dataset(
            &circuit,
            &outcome.theta,
            &outcome.mu,
            &grid,
            cfg.sampling.shots_per_phi,
            mix_index(data_seed, gi as u64),
        )?;
        let mut net = EstimatorNet::new(
            n,
            &cfg.estimator.hidden,
            train_ds.phis.clone(),
            mix_index(train_seed, gi as u64),
        )?;
        train_two_stage(&mut net, &train_ds, cfg, mix_index(train_seed, gi as u64))?;

        let pool_seed = mix_index(test_seed, gi as u64);
        let test_ds = generate_dataset_at(
            &circuit,
            &outcome.theta,
            &outcome.mu,
            &[phi_true],
            sequences * m,
            pool_seed,
        )?;
        let vqs_fi = fisher_at(&circuit, &outcome.theta, &outcome.mu, phi_true)?;
        let vqs_report = bias_variance(
            &net,
            test_ds.block(0),
            phi_true,
            &[m],
            sequences,
            cfg.bayes_mode(),
        )?;
        let r = &vqs_report.rows[0];
        body.push_str(&format!(
            "{gamma},vqs,{},{phi_true},{m},{},{},{},{}\n",
            vqs_fi.cfi, r.n_sequences, r.bias, r.variance, r.sq_error
        ));

        // GHZ side: identical φ, m, sequence count, and pool seed.
        let ghz_cfi = ghz_parity_cfi(n, gamma, phi_true)?;
        let parities = ghz_parity_pool(n, gamma, phi_true, sequences * m, pool_seed)?;
        let proto = GhzProtocol::new(n, gamma, train_ds.phis.clone())?;
        let ghz_report = ghz_bias_variance(&proto, &parities, phi_true, &[m], sequences)?;
        let g = &ghz_report.rows[0];
        body.push_str(&format!(
            "{gamma},ghz,{ghz_cfi},{phi_true},{m},{},{},{},{}\n",
            g.n_sequences, g.bias, g.variance, g.sq_error
        ));
        println!(
            "compare-ghz: gamma={gamma} vqs_cfi={:.3} ghz_cfi={:.3}",
            vqs_fi.cfi, ghz_cfi
        );
    }
    ctx.write(COMPARE_FILE, ctx.csv_with_hash(&body).as_bytes())?;
    println!("compare-ghz: wrote {COMPARE_FILE}");
    Ok(())
}

/// Dispatch a stage by name.
pub fn run_stage(ctx: &StageContext, stage: &str) -> Result<(), CliError> {
    match stage {
        "optimize" => run_optimize(ctx),
        "sample" => run_sample(ctx),
        "train" => run_train(ctx),
        "benchmark" => run_benchmark(ctx),
        "compare-ghz" => run_compare_ghz(ctx),
        other => Err(CliError::Config(format!("unknown stage {other}"))),
    }
}

/// Read a CSV artifact, skipping the config-hash comment line.
pub fn read_csv(path: &Path) -> Result<Vec<Vec<String>>, CliError> {
    let text = fs::read_to_string(path)?;
    Ok(text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| l.split(',').map(|s| s.to_string()).collect())
        .collect())
}
