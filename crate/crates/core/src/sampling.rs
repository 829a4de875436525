//! Measurement-shot sampling and the labeled dataset container.
//!
//! Datasets are three-dimensional binary arrays of shape
//! (n_φ, shots-per-φ, n). On disk they use the "VQSD" container: a fixed
//! little-endian header (magic, version, n, n_φ, |D_φ|, seed), the φ grid as
//! 8-byte floats, the shots bit-packed row-major (flat bit index
//! `(p·|D_φ| + s)·n + q`, LSB-first within each byte), and a length-prefixed
//! provenance text block.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::circuit::{interact, measure_probs, prepare, SensorCircuit};
use crate::seed::mix_index;
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"VQSD";
const VERSION: u32 = 1;

/// Evaluation grid for the phase of interest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseGrid {
    pub phi_min: f64,
    pub phi_max: f64,
    pub n_phi: usize,
}

impl PhaseGrid {
    /// Default range [0, π/n]: one monotone fringe of a GHZ-class likelihood.
    pub fn default_for(n: usize) -> Self {
        PhaseGrid {
            phi_min: 0.0,
            phi_max: std::f64::consts::PI / n as f64,
            n_phi: 100,
        }
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.n_phi;
        (0..n)
            .map(|i| self.phi_min + (self.phi_max - self.phi_min) * i as f64 / (n - 1) as f64)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_phi < 2 {
            return Err(Error::BadConfig("n_phi must be at least 2".into()));
        }
        if !(self.phi_max > self.phi_min) {
            return Err(Error::BadConfig("phi_max must exceed phi_min".into()));
        }
        Ok(())
    }
}

/// Borrowed view of all shots at one phase: rows of n bits each.
#[derive(Debug, Clone, Copy)]
pub struct ShotBlock<'a> {
    n: usize,
    bits: &'a [u8],
}

impl<'a> ShotBlock<'a> {
    pub fn new(n: usize, bits: &'a [u8]) -> Self {
        debug_assert_eq!(bits.len() % n, 0);
        ShotBlock { n, bits }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.bits.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn row(&self, i: usize) -> &'a [u8] {
        &self.bits[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &'a [u8]> + '_ {
        (0..self.len()).map(|i| self.row(i))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementDataset {
    pub n: usize,
    pub phis: Vec<f64>,
    pub shots_per_phi: usize,
    /// Flat (n_φ × |D_φ| × n) array of {0,1} bytes.
    pub shots: Vec<u8>,
    pub seed: u64,
    pub provenance: String,
}

impl MeasurementDataset {
    pub fn n_phi(&self) -> usize {
        self.phis.len()
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.phis.len(), self.shots_per_phi, self.n)
    }

    pub fn shot(&self, phi_idx: usize, shot_idx: usize) -> &[u8] {
        let start = (phi_idx * self.shots_per_phi + shot_idx) * self.n;
        &self.shots[start..start + self.n]
    }

    pub fn block(&self, phi_idx: usize) -> ShotBlock<'_> {
        let start = phi_idx * self.shots_per_phi * self.n;
        let end = start + self.shots_per_phi * self.n;
        ShotBlock::new(self.n, &self.shots[start..end])
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots.len() != self.phis.len() * self.shots_per_phi * self.n {
            return Err(Error::ShapeMismatch(format!(
                "shots array has {} entries for shape {:?}",
                self.shots.len(),
                self.shape()
            )));
        }
        if !self.phis.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidState("phi grid is not ascending".into()));
        }
        if self.shots.iter().any(|&b| b > 1) {
            return Err(Error::InvalidState("shot entries must be 0 or 1".into()));
        }
        Ok(())
    }

    /// CSV dump (phi_index, shot_index, bitstring) for inspection.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("phi_index,shot_index,bitstring\n");
        for p in 0..self.n_phi() {
            for s in 0..self.shots_per_phi {
                let bits: String = self
                    .shot(p, s)
                    .iter()
                    .map(|&b| if b == 1 { '1' } else { '0' })
                    .collect();
                out.push_str(&format!("{p},{s},{bits}\n"));
            }
        }
        out
    }

    /// True when the stored provenance matches this circuit and parameter set.
    pub fn provenance_matches(&self, circuit: &SensorCircuit, theta: &[f64], mu: &[f64]) -> bool {
        self.provenance == provenance_text(circuit, theta, mu)
    }
}

/// Deterministic provenance block: blueprint hash plus parameter snapshot.
pub fn provenance_text(circuit: &SensorCircuit, theta: &[f64], mu: &[f64]) -> String {
    let join = |v: &[f64]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    format!(
        "circuit={:016x}\ntheta={}\nmu={}\n",
        circuit.blueprint_hash(),
        join(theta),
        join(mu)
    )
}

/// Draw `count` i.i.d. outcomes from a distribution by inverse CDF.
/// Outcomes are basis indices; the stream is fully determined by the seed.
pub fn sample_shots(probs: &[f64], count: usize, rng_seed: u64) -> Vec<u32> {
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p.max(0.0);
        cdf.push(acc);
    }
    let total = acc.max(f64::MIN_POSITIVE);
    let mut rng = ChaCha12Rng::seed_from_u64(rng_seed);
    (0..count)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * total;
            let idx = cdf.partition_point(|&c| c <= u);
            idx.min(probs.len() - 1) as u32
        })
        .collect()
}

/// Unpack a basis index into its n-bit string (qubit 0 leftmost).
pub fn index_to_bits(index: u32, n: usize) -> Vec<u8> {
    (0..n).map(|q| ((index >> (n - 1 - q)) & 1) as u8).collect()
}

/// Sample a labeled dataset across the phase grid. Each grid point draws from
/// its own derived seed, so the grid can be sampled concurrently and any
/// sub-grid is reproducible in isolation.
pub fn generate_dataset(
    circuit: &SensorCircuit,
    theta: &[f64],
    mu: &[f64],
    grid: &PhaseGrid,
    shots_per_phi: usize,
    seed: u64,
) -> Result<MeasurementDataset> {
    grid.validate()?;
    generate_dataset_at(circuit, theta, mu, &grid.points(), shots_per_phi, seed)
}

/// Same as [`generate_dataset`] but over an explicit ascending phase list.
pub fn generate_dataset_at(
    circuit: &SensorCircuit,
    theta: &[f64],
    mu: &[f64],
    phi_values: &[f64],
    shots_per_phi: usize,
    seed: u64,
) -> Result<MeasurementDataset> {
    if shots_per_phi == 0 {
        return Err(Error::BadConfig("shots_per_phi must be at least 1".into()));
    }
    if phi_values.is_empty() || !phi_values.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::BadConfig(
            "phase values must be nonempty and strictly ascending".into(),
        ));
    }
    let prepared = prepare(circuit, theta)?;
    let n = circuit.n();
    let phis = phi_values.to_vec();
    let blocks: Vec<Vec<u8>> = phis
        .par_iter()
        .enumerate()
        .map(|(p, &phi)| {
            let probs = measure_probs(&interact(&prepared, phi), circuit, mu)?;
            let outcomes = sample_shots(&probs, shots_per_phi, mix_index(seed, p as u64));
            let mut bits = Vec::with_capacity(shots_per_phi * n);
            for o in outcomes {
                bits.extend(index_to_bits(o, n));
            }
            Ok(bits)
        })
        .collect::<Result<_>>()?;
    let mut shots = Vec::with_capacity(phis.len() * shots_per_phi * n);
    for b in blocks {
        shots.extend(b);
    }
    Ok(MeasurementDataset {
        n,
        phis,
        shots_per_phi,
        shots,
        seed,
        provenance: provenance_text(circuit, theta, mu),
    })
}

fn pack_bits(bits: &[u8]) -> Vec<u8> {
    let mut packed = vec![0u8; bits.len().div_ceil(8)];
    for (k, &b) in bits.iter().enumerate() {
        if b != 0 {
            packed[k / 8] |= 1 << (k % 8);
        }
    }
    packed
}

fn unpack_bits(packed: &[u8], count: usize) -> Vec<u8> {
    (0..count).map(|k| (packed[k / 8] >> (k % 8)) & 1).collect()
}

pub fn dataset_to_bytes(ds: &MeasurementDataset) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(ds.n as u32).to_le_bytes());
    out.extend_from_slice(&(ds.n_phi() as u32).to_le_bytes());
    out.extend_from_slice(&(ds.shots_per_phi as u32).to_le_bytes());
    out.extend_from_slice(&ds.seed.to_le_bytes());
    for phi in &ds.phis {
        out.extend_from_slice(&phi.to_le_bytes());
    }
    out.extend_from_slice(&pack_bits(&ds.shots));
    let prov = ds.provenance.as_bytes();
    out.extend_from_slice(&(prov.len() as u32).to_le_bytes());
    out.extend_from_slice(prov);
    out
}

pub fn dataset_from_bytes(bytes: &[u8]) -> Result<MeasurementDataset> {
    let corrupt = |msg: &str| Error::CorruptFile(format!("vqsd: {msg}"));
    let mut pos = 0usize;
    let take = |pos: &mut usize, len: usize| -> Result<&[u8]> {
        if *pos + len > bytes.len() {
            return Err(corrupt("truncated"));
        }
        let out = &bytes[*pos..*pos + len];
        *pos += len;
        Ok(out)
    };
    if take(&mut pos, 4)? != MAGIC {
        return Err(corrupt("bad magic"));
    }
    let u32_at = |b: &[u8]| u32::from_le_bytes(b.try_into().unwrap());
    if u32_at(take(&mut pos, 4)?) != VERSION {
        return Err(corrupt("unsupported version"));
    }
    let n = u32_at(take(&mut pos, 4)?) as usize;
    let n_phi = u32_at(take(&mut pos, 4)?) as usize;
    let shots_per_phi = u32_at(take(&mut pos, 4)?) as usize;
    let seed = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
    if n == 0 || n > 32 {
        return Err(Error::ShapeMismatch(format!("implausible qubit count {n}")));
    }
    let mut phis = Vec::with_capacity(n_phi);
    for _ in 0..n_phi {
        phis.push(f64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()));
    }
    let total_bits = n_phi * shots_per_phi * n;
    let packed = take(&mut pos, total_bits.div_ceil(8))?;
    let shots = unpack_bits(packed, total_bits);
    let prov_len = u32_at(take(&mut pos, 4)?) as usize;
    let provenance = String::from_utf8(take(&mut pos, prov_len)?.to_vec())
        .map_err(|_| corrupt("provenance is not utf-8"))?;
    if pos != bytes.len() {
        return Err(corrupt("trailing bytes"));
    }
    let ds = MeasurementDataset {
        n,
        phis,
        shots_per_phi,
        shots,
        seed,
        provenance,
    };
    ds.validate()?;
    Ok(ds)
}

pub fn save_dataset(ds: &MeasurementDataset, path: &Path) -> Result<()> {
    fs::write(path, dataset_to_bytes(ds))?;
    Ok(())
}

pub fn load_dataset(path: &Path) -> Result<MeasurementDataset> {
    dataset_from_bytes(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_ansatz, hea2_bell_theta, x_basis_mu, Ansatz};

    #[test]
    fn deterministic_distribution_yields_constant_outcomes() {
        let outcomes = sample_shots(&[1.0, 0.0], 50, 3);
        assert!(outcomes.iter().all(|&o| o == 0));
    }

    #[test]
    fn uniform_frequencies_concentrate() {
        let m = 100_000;
        let outcomes = sample_shots(&[0.25; 4], m, 17);
        for target in 0..4u32 {
            let freq = outcomes.iter().filter(|&&o| o == target).count() as f64 / m as f64;
            assert!((freq - 0.25).abs() < 0.01, "outcome {target}: {freq}");
        }
    }

    #[test]
    fn same_seed_gives_identical_streams() {
        let a = sample_shots(&[0.3, 0.2, 0.5], 1000, 11);
        let b = sample_shots(&[0.3, 0.2, 0.5], 1000, 11);
        assert_eq!(a, b);
        let c = sample_shots(&[0.3, 0.2, 0.5], 1000, 12);
        assert_ne!(a, c);
    }

    #[test]
    fn minimal_dataset_shape() {
        let circuit = build_ansatz(Ansatz::Hea, 2, 1, 0.0).unwrap();
        let grid = PhaseGrid {
            phi_min: 0.0,
            phi_max: 1.0,
            n_phi: 2,
        };
        let ds = generate_dataset(
            &circuit,
            &vec![0.1; circuit.n_theta()],
            &vec![0.0; circuit.n_mu()],
            &grid,
            1,
            5,
        )
        .unwrap();
        assert_eq!(ds.shape(), (2, 1, 2));
        ds.validate().unwrap();
    }

    #[test]
    fn dataset_matches_requested_grid_and_counts() {
        let circuit = build_ansatz(Ansatz::Hea, 4, 1, 0.0).unwrap();
        let grid = PhaseGrid::default_for(4);
        let ds = generate_dataset(
            &circuit,
            &vec![0.2; circuit.n_theta()],
            &vec![0.3; circuit.n_mu()],
            &grid,
            40,
            9,
        )
        .unwrap();
        assert_eq!(ds.shape(), (100, 40, 4));
        assert_eq!(ds.phis.first().copied(), Some(0.0));
        let last = ds.phis.last().copied().unwrap();
        assert!((last - std::f64::consts::PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn identical_inputs_reproduce_the_dataset() {
        let circuit = build_ansatz(Ansatz::Tia, 2, 1, 0.0).unwrap();
        let grid = PhaseGrid {
            phi_min: 0.0,
            phi_max: 1.2,
            n_phi: 7,
        };
        let theta = vec![0.4; circuit.n_theta()];
        let mu = vec![0.2; circuit.n_mu()];
        let a = generate_dataset(&circuit, &theta, &mu, &grid, 25, 123).unwrap();
        let b = generate_dataset(&circuit, &theta, &mu, &grid, 25, 123).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bell_probe_at_zero_phase_gives_even_parity_only() {
        // X-basis readout of the Bell probe at φ=0 has p(even parity) = 1.
        let circuit = build_ansatz(Ansatz::Hea, 2, 1, 0.0).unwrap();
        let grid = PhaseGrid {
            phi_min: 0.0,
            phi_max: 0.5,
            n_phi: 2,
        };
        let ds =
            generate_dataset(&circuit, &hea2_bell_theta(), &x_basis_mu(2), &grid, 200, 7).unwrap();
        let block = ds.block(0);
        for row in block.rows() {
            let parity: u8 = row.iter().sum::<u8>() % 2;
            assert_eq!(parity, 0);
        }
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let circuit = build_ansatz(Ansatz::Hea, 3, 1, 0.0).unwrap();
        let grid = PhaseGrid {
            phi_min: 0.1,
            phi_max: 0.9,
            n_phi: 5,
        };
        let ds = generate_dataset(
            &circuit,
            &vec![0.7; circuit.n_theta()],
            &vec![0.5; circuit.n_mu()],
            &grid,
            13,
            77,
        )
        .unwrap();
        let bytes = dataset_to_bytes(&ds);
        let back = dataset_from_bytes(&bytes).unwrap();
        assert_eq!(ds, back);
        assert_eq!(bytes, dataset_to_bytes(&back));
    }

    #[test]
    fn truncated_file_is_rejected() {
        let circuit = build_ansatz(Ansatz::Hea, 2, 1, 0.0).unwrap();
        let grid = PhaseGrid {
            phi_min: 0.0,
            phi_max: 1.0,
            n_phi: 3,
        };
        let ds = generate_dataset(
            &circuit,
            &vec![0.0; circuit.n_theta()],
            &vec![0.0; circuit.n_mu()],
            &grid,
            4,
            1,
        )
        .unwrap();
        let bytes = dataset_to_bytes(&ds);
        for cut in [3usize, 10, bytes.len() - 1] {
            assert!(
                matches!(
                    dataset_from_bytes(&bytes[..cut]),
                    Err(Error::CorruptFile(_))
                ),
                "cut at {cut}"
            );
        }
    }

    #[test]
    fn provenance_mismatch_is_detected() {
        let circuit = build_ansatz(Ansatz::Hea, 2, 1, 0.0).unwrap();
        let grid = PhaseGrid {
            phi_min: 0.0,
            phi_max: 1.0,
            n_phi: 2,
        };
        let theta = vec![0.25; circuit.n_theta()];
        let mu = vec![0.5; circuit.n_mu()];
        let ds = generate_dataset(&circuit, &theta, &mu, &grid, 3, 2).unwrap();
        assert!(ds.provenance_matches(&circuit, &theta, &mu));
        let other_theta = vec![0.26; circuit.n_theta()];
        assert!(!ds.provenance_matches(&circuit, &other_theta, &mu));
        let other = build_ansatz(Ansatz::Tia, 2, 1, 0.0).unwrap();
        assert!(!ds.provenance_matches(
            &other,
            &vec![0.0; other.n_theta()],
            &vec![0.0; other.n_mu()]
        ));
    }

    #[test]
    fn csv_export_lists_every_shot() {
        let circuit = build_ansatz(Ansatz::Hea, 2, 1, 0.0).unwrap();
        let grid = PhaseGrid {
            phi_min: 0.0,
            phi_max: 1.0,
            n_phi: 2,
        };
        let ds = generate_dataset(
            &circuit,
            &vec![0.0; circuit.n_theta()],
            &vec![0.0; circuit.n_mu()],
            &grid,
            3,
            2,
        )
        .unwrap();
        let csv = ds.to_csv();
        assert_eq!(csv.lines().count(), 1 + 6);
        assert!(csv.lines().nth(1).unwrap().starts_with("0,0,"));
    }

    #[test]
    fn empirical_distribution_converges_in_total_variation() {
        let probs = [0.04, 0.3, 0.06, 0.1, 0.2, 0.05, 0.15, 0.1];
        let m = 10_000usize;
        let outcomes = sample_shots(&probs, m, 31);
        let mut counts = vec![0usize; probs.len()];
        for o in outcomes {
            counts[o as usize] += 1;
        }
        let tv: f64 = probs
            .iter()
            .zip(&counts)
            .map(|(&p, &c)| (p - c as f64 / m as f64).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 5.0 / (m as f64).sqrt(), "tv distance {tv}");
    }
}
