//! Run configuration: one versioned TOML document covering every pipeline
//! stage, with validation that names the offending key.

use serde::{Deserialize, Serialize};

use vqs_core::circuit::Ansatz;
use vqs_core::estimator::BayesMode;
use vqs_core::optimize::Objective;
use vqs_core::state::{MAX_QUBITS_MIXED, MAX_QUBITS_PURE};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub run: RunSection,
    pub circuit: CircuitSection,
    #[serde(default)]
    pub optimize: OptimizeSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub sampling: SamplingSection,
    #[serde(default)]
    pub estimator: EstimatorSection,
    #[serde(default)]
    pub benchmark: BenchmarkSection,
    #[serde(default)]
    pub compare_ghz: CompareGhzSection,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    pub out_dir: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CircuitSection {
    pub ansatz: String,
    pub n: usize,
    pub d: usize,
    #[serde(default)]
    pub gamma: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizeSection {
    pub objective: String,
    pub iterations: usize,
    pub restarts: usize,
    pub learning_rate: f64,
    /// Defaults to π/(2n) when absent.
    pub phi_eval: Option<f64>,
    pub plateau_window: usize,
    pub plateau_rel_tol: f64,
}

impl Default for OptimizeSection {
    fn default() -> Self {
        OptimizeSection {
            objective: "cfi".into(),
            iterations: 1500,
            restarts: 5,
            learning_rate: 0.08,
            phi_eval: None,
            plateau_window: 100,
            plateau_rel_tol: 1e-5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub phi_min: f64,
    /// Defaults to π/n when absent.
    pub phi_max: Option<f64>,
    pub n_phi: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            phi_min: 0.0,
            phi_max: None,
            n_phi: 100,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingSection {
    pub shots_per_phi: usize,
}

impl Default for SamplingSection {
    fn default() -> Self {
        SamplingSection {
            shots_per_phi: 1000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorSection {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub l2: f64,
    /// Extra epochs at learning_rate/10 after the main stage; 0 disables.
    pub fine_tune_epochs: usize,
}

impl Default for EstimatorSection {
    fn default() -> Self {
        EstimatorSection {
            hidden: vec![64, 64],
            epochs: 40,
            batch_size: 256,
            learning_rate: 3e-3,
            l2: 1e-6,
            fine_tune_epochs: 20,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct BenchmarkSection {
    /// Defaults to the midpoint of the phase grid when absent.
    pub phi_true: Option<Vec<f64>>,
    pub m_grid: Vec<usize>,
    pub sequences: usize,
    pub bayes_mode: String,
}

impl Default for BenchmarkSection {
    fn default() -> Self {
        BenchmarkSection {
            phi_true: None,
            m_grid: vec![1, 3, 10, 30, 100, 300, 1000],
            sequences: 200,
            bayes_mode: "log".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CompareGhzSection {
    pub gammas: Vec<f64>,
    /// Defaults to a quarter of the grid range (off the mid-fringe blind
    /// spot, where the GHZ estimator bias would be invisible).
    pub phi_true: Option<f64>,
    pub m: usize,
    pub sequences: usize,
    pub iterations_gamma0: usize,
    pub restarts_gamma0: usize,
    pub iterations_warm: usize,
}

impl Default for CompareGhzSection {
    fn default() -> Self {
        CompareGhzSection {
            gammas: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
            phi_true: None,
            m: 100,
            sequences: 200,
            iterations_gamma0: 800,
            restarts_gamma0: 3,
            iterations_warm: 500,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, CliError> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| CliError::Config(format!("config parse: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn ansatz(&self) -> Ansatz {
        Ansatz::parse(&self.circuit.ansatz).expect("validated")
    }

    pub fn objective(&self) -> Objective {
        Objective::parse(&self.optimize.objective).expect("validated")
    }

    pub fn bayes_mode(&self) -> BayesMode {
        match self.benchmark.bayes_mode.as_str() {
            "log" => BayesMode::LogSpace,
            "raw" => BayesMode::RawProduct,
            _ => unreachable!("validated"),
        }
    }

    pub fn phi_max(&self) -> f64 {
        self.grid
            .phi_max
            .unwrap_or(std::f64::consts::PI / self.circuit.n as f64)
    }

    pub fn phi_eval(&self) -> f64 {
        self.optimize
            .phi_eval
            .unwrap_or(std::f64::consts::PI / (2.0 * self.circuit.n as f64))
    }

    pub fn benchmark_phis(&self) -> Vec<f64> {
        self.benchmark
            .phi_true
            .clone()
            .unwrap_or_else(|| vec![0.5 * (self.grid.phi_min + self.phi_max())])
    }

    pub fn compare_phi(&self) -> f64 {
        self.compare_ghz
            .phi_true
            .unwrap_or_else(|| self.grid.phi_min + 0.25 * (self.phi_max() - self.grid.phi_min))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |key: &str, msg: String| Err(CliError::Config(format!("{key}: {msg}")));
        if self.schema_version != SCHEMA_VERSION {
            return bad(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            );
        }
        if Ansatz::parse(&self.circuit.ansatz).is_none() {
            return bad(
                "circuit.ansatz",
                format!("unknown ansatz {:?} (hea|tia|graph)", self.circuit.ansatz),
            );
        }
        if !(0.0..=1.0).contains(&self.circuit.gamma) {
            return bad(
                "circuit.gamma",
                format!("must be within [0, 1] (got {})", self.circuit.gamma),
            );
        }
        let cap = if self.circuit.gamma > 0.0 {
            MAX_QUBITS_MIXED
        } else {
            MAX_QUBITS_PURE
        };
        if self.circuit.n < 2 || self.circuit.n > cap {
            return bad(
                "circuit.n",
                format!("must be within 2..={cap} (got {})", self.circuit.n),
            );
        }
        if self.circuit.d == 0 {
            return bad("circuit.d", "must be at least 1".into());
        }
        if Objective::parse(&self.optimize.objective).is_none() {
            return bad(
                "optimize.objective",
                format!("unknown objective {:?} (cfi|qfi)", self.optimize.objective),
            );
        }
        if self.optimize.iterations == 0 {
            return bad("optimize.iterations", "must be at least 1".into());
        }
        if self.optimize.restarts == 0 {
            return bad("optimize.restarts", "must be at least 1".into());
        }
        if !(self.optimize.learning_rate > 0.0) {
            return bad("optimize.learning_rate", "must be positive".into());
        }
        if self.grid.n_phi < 2 {
            return bad("grid.n_phi", "must be at least 2".into());
        }
        if !(self.phi_max() > self.grid.phi_min) {
            return bad("grid.phi_max", "must exceed grid.phi_min".into());
        }
        if self.sampling.shots_per_phi == 0 {
            return bad("sampling.shots_per_phi", "must be at least 1".into());
        }
        if self.estimator.epochs == 0 || self.estimator.batch_size == 0 {
            return bad(
                "estimator.epochs",
                "epochs and batch_size must be positive".into(),
            );
        }
        if !(self.estimator.learning_rate > 0.0) {
            return bad("estimator.learning_rate", "must be positive".into());
        }
        if self.estimator.l2 < 0.0 {
            return bad("estimator.l2", "must be nonnegative".into());
        }
        if self.benchmark.m_grid.is_empty() || self.benchmark.m_grid.iter().any(|&m| m == 0) {
            return bad("benchmark.m_grid", "entries must be positive".into());
        }
        if self.benchmark.sequences == 0 {
            return bad("benchmark.sequences", "must be at least 1".into());
        }
        if !matches!(self.benchmark.bayes_mode.as_str(), "log" | "raw") {
            return bad(
                "benchmark.bayes_mode",
                format!("unknown mode {:?} (log|raw)", self.benchmark.bayes_mode),
            );
        }
        if let Some(phis) = &self.benchmark.phi_true {
            if phis.is_empty() || !phis.windows(2).all(|w| w[0] < w[1]) {
                return bad(
                    "benchmark.phi_true",
                    "must be nonempty and strictly ascending".into(),
                );
            }
        }
        if self.compare_ghz.gammas.is_empty()
            || self
                .compare_ghz
                .gammas
                .iter()
                .any(|g| !(0.0..=1.0).contains(g))
        {
            return bad(
                "compare_ghz.gammas",
                "entries must lie within [0, 1]".into(),
            );
        }
        if !self.compare_ghz.gammas.windows(2).all(|w| w[0] < w[1]) {
            return bad("compare_ghz.gammas", "must be strictly ascending".into());
        }
        if self.compare_ghz.m == 0 || self.compare_ghz.sequences == 0 {
            return bad("compare_ghz.m", "m and sequences must be positive".into());
        }
        if self.compare_ghz.iterations_gamma0 == 0
            || self.compare_ghz.restarts_gamma0 == 0
            || self.compare_ghz.iterations_warm == 0
        {
            return bad(
                "compare_ghz.iterations_gamma0",
                "optimizer budgets must be positive".into(),
            );
        }
        if self.ansatz() == Ansatz::Graph && self.circuit.n % 2 != 0 {
            return bad("circuit.n", "graph ansatz needs an even qubit count".into());
        }
        Ok(())
    }

    /// Stable fingerprint of the effective configuration; the output
    /// directory does not participate, everything else does.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.run.out_dir = String::new();
        let text = toml::to_string(&canonical).expect("config serializes");
        format!("{:016x}", vqs_core::seed::fnv1a(text.as_bytes()))
    }
}

/// The default configuration as an annotated document.
pub fn template() -> String {
    let pi = std::f64::consts::PI;
    format!(
        r#"# vqs pipeline configuration (schema v{SCHEMA_VERSION})
schema_version = {SCHEMA_VERSION}

[run]
seed = 1                # master seed; stage seeds derive from it
out_dir = "runs/demo"   # artifact directory (override with --out)

[circuit]
ansatz = "hea"          # hea | tia | graph
n = 4                   # qubits (2..=12 pure, 2..=8 with gamma > 0)
d = 4                   # brick-work depth (ignored for graph)
gamma = 0.0             # dephasing after each two-qubit prep gate, in [0, 1]

[optimize]
objective = "cfi"       # cfi | qfi
iterations = 1500       # per restart (plateau rule may stop earlier)
restarts = 5            # independent random starts, best kept
learning_rate = 0.08
# phi_eval = {phi_eval}   # default: pi/(2n)
plateau_window = 100
plateau_rel_tol = 1e-5

[grid]
phi_min = 0.0
# phi_max = {phi_max}   # default: pi/n (one monotone fringe)
n_phi = 100             # phase bins; also the estimator output width

[sampling]
shots_per_phi = 1000    # |D_phi| training shots per grid phase

[estimator]
hidden = [64, 64]       # hidden layer widths
epochs = 40
batch_size = 256
learning_rate = 0.003
l2 = 0.000001
fine_tune_epochs = 20   # extra epochs at learning_rate/10 (0 disables)

[benchmark]
# phi_true = [{phi_mid}]   # default: grid midpoint
m_grid = [1, 3, 10, 30, 100, 300, 1000]
sequences = 200         # test sequences per (phi_true, m)
bayes_mode = "log"      # log | raw (raw reproduces the underflow failure)

[compare_ghz]
gammas = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5]
# phi_true = {phi_quarter}   # default: quarter of the grid range
m = 100
sequences = 200
iterations_gamma0 = 800 # full optimization budget at gamma = 0
restarts_gamma0 = 3
iterations_warm = 500   # warm-started budget for each later gamma
"#,
        phi_eval = pi / 8.0,
        phi_max = pi / 4.0,
        phi_mid = pi / 8.0,
        phi_quarter = pi / 16.0,
    )
}
