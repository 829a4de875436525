//! Sensor circuit blueprints: the three probe ansätze, the phase-imprinting
//! interaction layer, and the parameterized measurement layer.
//!
//! A circuit is an immutable blueprint. Preparation gates consume the θ vector,
//! measurement gates consume μ, and the interaction between them is always the
//! local rotation K(φ) = ⊗ RZ(φ). When a dephasing strength γ > 0 is
//! configured, the whole simulation runs on density matrices and the channel
//! is applied to both qubits after every two-qubit preparation gate.

use std::f64::consts::PI;

use crate::gates::{gate_matrix, Angle, GateKind, GateSpec};
use crate::matrix::ComplexMatrix;
use crate::seed::fnv1a;
use crate::state::{
    apply_gate_rho, apply_gate_vec, QuantumState, MAX_QUBITS_MIXED, MAX_QUBITS_PURE,
};
use crate::{Error, Result, C64};

/// Local dephasing noise applied after two-qubit preparation gates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingSpec {
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ansatz {
    /// Hardware-efficient: RZ/RX rotations with nearest-neighbor CZ layers.
    Hea,
    /// Trapped-ion: RX/RY rotations with Mølmer–Sørensen couplings.
    Tia,
    /// Complete-bipartite graph state with local dressing rotations.
    Graph,
}

impl Ansatz {
    pub fn name(self) -> &'static str {
        match self {
            Ansatz::Hea => "hea",
            Ansatz::Tia => "tia",
            Ansatz::Graph => "graph",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "hea" => Ansatz::Hea,
            "tia" => Ansatz::Tia,
            "graph" => Ansatz::Graph,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorCircuit {
    n: usize,
    ansatz: Ansatz,
    depth: usize,
    prep: Vec<GateSpec>,
    meas: Vec<GateSpec>,
    n_theta: usize,
    n_mu: usize,
    noise: Option<DephasingSpec>,
}

impl SensorCircuit {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ansatz(&self) -> Ansatz {
        self.ansatz
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_mu(&self) -> usize {
        self.n_mu
    }

    pub fn prep_gates(&self) -> &[GateSpec] {
        &self.prep
    }

    pub fn meas_gates(&self) -> &[GateSpec] {
        &self.meas
    }

    pub fn gamma(&self) -> f64 {
        self.noise.map_or(0.0, |d| d.gamma)
    }

    pub fn has_noise(&self) -> bool {
        self.noise.is_some()
    }
}

/// Build one of the three probe ansätze.
///
/// `d` is the brick-work depth for HEA/TIA and is ignored for GRAPH. A
/// positive `gamma` attaches the post-two-qubit-gate dephasing channel.
pub fn build_ansatz(kind: Ansatz, n: usize, d: usize, gamma: f64) -> Result<SensorCircuit> {
    if n < 2 {
        return Err(Error::BadSize(format!("need at least 2 qubits, got {n}")));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::BadConfig(format!("gamma {gamma} outside [0, 1]")));
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
    if matches!(kind, Ansatz::Hea | Ansatz::Tia) && d < 1 {
        return Err(Error::BadSize("depth must be at least 1".into()));
    }
    if kind == Ansatz::Graph && n % 2 != 0 {
        return Err(Error::BadSize(format!(
            "graph ansatz needs an even qubit count, got {n}"
        )));
    }

    let noise = (gamma > 0.0).then_some(DephasingSpec { gamma });
    let mut prep = Vec::new();
    let mut meas = Vec::new();
    let mut slot = 0usize;
    let push_rot = |gates: &mut Vec<GateSpec>, kind: GateKind, q: usize, slot: &mut usize| {
        gates.push(GateSpec::slotted(kind, vec![q], *slot));
        *slot += 1;
    };

    let (depth, n_theta, n_mu) = match kind {
        Ansatz::Hea => {
            for _ in 0..d {
                for q in 0..n {
                    push_rot(&mut prep, GateKind::Rz, q, &mut slot);
                }
                for q in 0..n {
                    push_rot(&mut prep, GateKind::Rx, q, &mut slot);
                }
                for i in 0..n - 1 {
                    prep.push(GateSpec::fixed(GateKind::Cphase, vec![i, i + 1], PI));
                }
            }
            for q in 0..n {
                push_rot(&mut prep, GateKind::Rz, q, &mut slot);
            }
            for q in 0..n {
                push_rot(&mut prep, GateKind::Rx, q, &mut slot);
            }
            let n_theta = slot;
            slot = 0;
            for q in 0..n {
                push_rot(&mut meas, GateKind::Rz, q, &mut slot);
            }
            for q in 0..n {
                push_rot(&mut meas, GateKind::Rx, q, &mut slot);
            }
            (d, n_theta, slot)
        }
        Ansatz::Tia => {
            for _ in 0..d {
                for q in 0..n {
                    push_rot(&mut prep, GateKind::Rx, q, &mut slot);
                }
                for q in 0..n {
                    push_rot(&mut prep, GateKind::Ry, q, &mut slot);
                }
                for i in 0..n - 1 {
                    prep.push(GateSpec::slotted(GateKind::Ms, vec![i, i + 1], slot));
                    slot += 1;
                }
            }
            let n_theta = slot;
            slot = 0;
            for q in 0..n {
                push_rot(&mut meas, GateKind::Rx, q, &mut slot);
            }
            for q in 0..n {
                push_rot(&mut meas, GateKind::Ry, q, &mut slot);
            }
            for q in 0..n {
                push_rot(&mut meas, GateKind::Rz, q, &mut slot);
            }
            (d, n_theta, slot)
        }
        Ansatz::Graph => {
            for q in 0..n {
                prep.push(GateSpec::bare(GateKind::H, vec![q]));
            }
            for a in 0..n / 2 {
                for b in n / 2..n {
                    prep.push(GateSpec::fixed(GateKind::Cphase, vec![a, b], PI));
                }
            }
            for q in 0..n {
                push_rot(&mut prep, GateKind::Rz, q, &mut slot);
            }
            for q in 0..n {
                push_rot(&mut prep, GateKind::Rx, q, &mut slot);
            }
            let n_theta = slot;
            slot = 0;
            for q in 0..n {
                push_rot(&mut meas, GateKind::Rz, q, &mut slot);
            }
            for q in 0..n {
                push_rot(&mut meas, GateKind::Rx, q, &mut slot);
            }
            (0, n_theta, slot)
        }
    };

    debug_assert_eq!(
        n_theta + n_mu,
        match kind {
            Ansatz::Hea => 2 * n * depth + 4 * n,
            Ansatz::Tia => (3 * n - 1) * depth + 3 * n,
            Ansatz::Graph => 4 * n,
        }
    );

    Ok(SensorCircuit {
        n,
        ansatz: kind,
        depth,
        prep,
        meas,
        n_theta,
        n_mu,
        noise,
    })
}

enum Working {
    Pure(Vec<C64>),
    Mixed(ComplexMatrix),
}

impl Working {
    fn apply(&mut self, u: &ComplexMatrix, targets: &[usize], n: usize) {
        match self {
            Working::Pure(amps) => apply_gate_vec(u, targets, n, amps),
            Working::Mixed(rho) => apply_gate_rho(u, targets, n, rho),
        }
    }
}

/// Scale the coherences that straddle `target` by √(1-γ).
///
/// This is the exact action of the dephasing Kraus pair {diag(1, √(1-γ)),
/// diag(0, √γ)}: entries with equal target bits pick up 1·1 + (1-γ)+γ = 1,
/// mismatched bits pick up the single factor √(1-γ).
pub(crate) fn dephase_rho(rho: &mut ComplexMatrix, target: usize, n: usize, gamma: f64) {
    let pos = n - 1 - target;
    let damp = (1.0 - gamma).sqrt();
    let dim = 1usize << n;
    for i in 0..dim {
        for j in 0..dim {
            if (i >> pos) & 1 != (j >> pos) & 1 {
                rho[(i, j)] *= damp;
            }
        }
    }
}

/// Run the preparation layer on |0...0> with the given θ.
pub fn prepare(circuit: &SensorCircuit, theta: &[f64]) -> Result<QuantumState> {
    if theta.len() != circuit.n_theta {
        return Err(Error::BadLength {
            got: theta.len(),
            expected: circuit.n_theta,
        });
    }
    let n = circuit.n;
    let mut work = if circuit.has_noise() {
        let mut rho = ComplexMatrix::zeros(1 << n, 1 << n);
        rho[(0, 0)] = C64::ONE;
        Working::Mixed(rho)
    } else {
        let mut amps = vec![C64::ZERO; 1 << n];
        amps[0] = C64::ONE;
        Working::Pure(amps)
    };

    for gate in &circuit.prep {
        let u = gate_matrix(gate.kind, gate.angle_value(theta))?;
        work.apply(&u, &gate.targets, n);
        if gate.targets.len() == 2 {
            if let (Some(spec), Working::Mixed(rho)) = (circuit.noise, &mut work) {
                dephase_rho(rho, gate.targets[0], n, spec.gamma);
                dephase_rho(rho, gate.targets[1], n, spec.gamma);
            }
        }
    }

    Ok(match work {
        Working::Pure(amps) => QuantumState::Pure { n, amps },
        Working::Mixed(rho) => QuantumState::Mixed { n, rho },
    })
}

/// Diagonal phases of K(φ): basis index i picks up exp(-iφ g_i) with
/// g_i = (n - 2·popcount(i))/2.
pub(crate) fn generator_eigenvalue(index: usize, n: usize) -> f64 {
    (n as f64 - 2.0 * (index.count_ones() as f64)) / 2.0
}

/// Imprint the phase: rotate every qubit by RZ(φ).
pub fn interact(state: &QuantumState, phi: f64) -> QuantumState {
    let n = state.n();
    match state {
        QuantumState::Pure { amps, .. } => {
            let amps = amps
                .iter()
                .enumerate()
                .map(|(i, a)| a * C64::cis(-phi * generator_eigenvalue(i, n)))
                .collect();
            QuantumState::Pure { n, amps }
        }
        QuantumState::Mixed { rho, .. } => {
            let dim = 1usize << n;
            let mut out = rho.clone();
            for i in 0..dim {
                for j in 0..dim {
                    let delta = generator_eigenvalue(i, n) - generator_eigenvalue(j, n);
                    out[(i, j)] *= C64::cis(-phi * delta);
                }
            }
            QuantumState::Mixed { n, rho: out }
        }
    }
}

pub(crate) fn meas_layer_vec(circuit: &SensorCircuit, mu: &[f64], amps: &mut [C64]) -> Result<()> {
    for gate in &circuit.meas {
        let u = gate_matrix(gate.kind, gate.angle_value(mu))?;
        apply_gate_vec(&u, &gate.targets, circuit.n, amps);
    }
    Ok(())
}

pub(crate) fn meas_layer_rho(
    circuit: &SensorCircuit,
    mu: &[f64],
    rho: &mut ComplexMatrix,
) -> Result<()> {
    for gate in &circuit.meas {
        let u = gate_matrix(gate.kind, gate.angle_value(mu))?;
        apply_gate_rho(&u, &gate.targets, circuit.n, rho);
    }
    Ok(())
}

/// Apply the μ-parameterized measurement rotations, then read out the
/// computational-basis likelihood p(s|φ).
pub fn measure_probs(
    state: &QuantumState,
    circuit: &SensorCircuit,
    mu: &[f64],
) -> Result<Vec<f64>> {
    if mu.len() != circuit.n_mu {
        return Err(Error::BadLength {
            got: mu.len(),
            expected: circuit.n_mu,
        });
    }
    match state {
        QuantumState::Pure { amps, .. } => {
            let mut work = amps.clone();
            meas_layer_vec(circuit, mu, &mut work)?;
            Ok(work.iter().map(|a| a.norm_sqr()).collect())
        }
        QuantumState::Mixed { rho, .. } => {
            let mut work = rho.clone();
            meas_layer_rho(circuit, mu, &mut work)?;
            Ok((0..work.rows()).map(|i| work[(i, i)].re).collect())
        }
    }
}

/// Reference θ driving HEA(n=2, d=1) exactly onto the Bell state
/// (|00> + |11>)/√2; kept as a regression fixture.
pub fn hea2_bell_theta() -> Vec<f64> {
    let q = std::f64::consts::FRAC_PI_2;
    vec![0.0, 0.0, q, q, 0.0, 0.0, -q, 0.0]
}

/// Reference θ for the graph ansatz that rotates every qubit's readout axis
/// onto X, where the probe attains its plateau QFI of n²/2.
pub fn graph_plateau_theta(n: usize) -> Vec<f64> {
    vec![std::f64::consts::FRAC_PI_2; 2 * n]
}

/// μ realizing an X-basis readout on every qubit for ansätze whose
/// measurement layer is RZ-then-RX per qubit (HEA and GRAPH).
pub fn x_basis_mu(n: usize) -> Vec<f64> {
    vec![std::f64::consts::FRAC_PI_2; 2 * n]
}

impl SensorCircuit {
    /// Serialize the blueprint to a line-based text document.
    pub fn to_blueprint(&self) -> String {
        let mut out = String::new();
        out.push_str("vqs-circuit v1\n");
        out.push_str(&format!("ansatz {}\n", self.ansatz.name()));
        out.push_str(&format!("n {}\n", self.n));
        out.push_str(&format!("d {}\n", self.depth));
        out.push_str(&format!("gamma {}\n", self.gamma()));
        for (section, gates) in [("prep", &self.prep), ("meas", &self.meas)] {
            for g in gates.iter() {
                let targets: Vec<String> = g.targets.iter().map(|t| t.to_string()).collect();
                let angle = match g.angle {
                    Some(Angle::Slot(s)) => format!(" slot {s}"),
                    Some(Angle::Fixed(v)) => format!(" fixed {v}"),
                    None => String::new(),
                };
                out.push_str(&format!(
                    "{section} {} {}{}\n",
                    g.kind.name(),
                    targets.join(" "),
                    angle
                ));
            }
        }
        out
    }

    /// Parse a blueprint document produced by [`SensorCircuit::to_blueprint`].
    pub fn from_blueprint(text: &str) -> Result<SensorCircuit> {
        let bad = |msg: &str| Error::CorruptFile(format!("blueprint: {msg}"));
        let mut lines = text.lines();
        if lines.next() != Some("vqs-circuit v1") {
            return Err(bad("missing or unsupported header"));
        }
        let mut ansatz = None;
        let mut n = None;
        let mut depth = None;
        let mut gamma = 0.0f64;
        let mut prep = Vec::new();
        let mut meas = Vec::new();
        for line in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens[0] {
                "ansatz" => {
                    ansatz = Ansatz::parse(tokens.get(1).copied().unwrap_or(""));
                    if ansatz.is_none() {
                        return Err(bad("unknown ansatz"));
                    }
                }
                "n" => n = tokens.get(1).and_then(|t| t.parse().ok()),
                "d" => depth = tokens.get(1).and_then(|t| t.parse().ok()),
                "gamma" => {
                    gamma = tokens
                        .get(1)
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad("bad gamma"))?;
                }
                "prep" | "meas" => {
                    let kind = tokens
                        .get(1)
                        .and_then(|t| GateKind::parse(t))
                        .ok_or_else(|| bad("unknown gate kind"))?;
                    let arity = kind.arity();
                    if tokens.len() < 2 + arity {
                        return Err(bad("truncated gate line"));
                    }
                    let targets: Vec<usize> = tokens[2..2 + arity]
                        .iter()
                        .map(|t| t.parse().map_err(|_| bad("bad target")))
                        .collect::<Result<_>>()?;
                    let angle = match tokens.get(2 + arity).copied() {
                        Some("slot") => Some(Angle::Slot(
                            tokens
                                .get(3 + arity)
                                .and_then(|t| t.parse().ok())
                                .ok_or_else(|| bad("bad slot"))?,
                        )),
                        Some("fixed") => Some(Angle::Fixed(
                            tokens
                                .get(3 + arity)
                                .and_then(|t| t.parse().ok())
                                .ok_or_else(|| bad("bad fixed angle"))?,
                        )),
                        Some(other) => return Err(bad(&format!("unexpected token {other}"))),
                        None => None,
                    };
                    if kind.is_parameterized() != angle.is_some() {
                        return Err(bad("angle does not match gate kind"));
                    }
                    let spec = GateSpec {
                        kind,
                        targets,
                        angle,
                    };
                    if tokens[0] == "prep" {
                        prep.push(spec);
                    } else {
                        meas.push(spec);
                    }
                }
                other => return Err(bad(&format!("unknown directive {other}"))),
            }
        }
        let n = n.ok_or_else(|| bad("missing n"))?;
        let depth = depth.ok_or_else(|| bad("missing d"))?;
        let ansatz = ansatz.ok_or_else(|| bad("missing ansatz"))?;
        let slot_count = |gates: &[GateSpec]| -> Result<usize> {
            let mut seen: Vec<usize> = gates
                .iter()
                .filter_map(|g| match g.angle {
                    Some(Angle::Slot(s)) => Some(s),
                    _ => None,
                })
                .collect();
            seen.sort_unstable();
            for (i, &s) in seen.iter().enumerate() {
                if s != i {
                    return Err(bad("parameter slots are not contiguous"));
                }
            }
            Ok(seen.len())
        };
        let n_theta = slot_count(&prep)?;
        let n_mu = slot_count(&meas)?;
        for g in prep.iter().chain(meas.iter()) {
            if g.targets.iter().any(|&t| t >= n) {
                return Err(bad("gate target out of range"));
            }
        }
        Ok(SensorCircuit {
            n,
            ansatz,
            depth,
            prep,
            meas,
            n_theta,
            n_mu,
            noise: (gamma > 0.0).then_some(DephasingSpec { gamma }),
        })
    }

    /// Stable fingerprint of the serialized blueprint.
    pub fn blueprint_hash(&self) -> u64 {
        fnv1a(self.to_blueprint().as_bytes())
    }
}
