//! Gate set for the sensor ansätze.
//!
//! Conventions are fixed here: rotations use half-angle generators,
//! RZ(φ) = exp(-iφZ/2); CPHASE puts its phase on |11>; MS is the XX rotation
//! exp(-iφ(X⊗X)/2).

use crate::matrix::ComplexMatrix;
use crate::{Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    H,
    Cnot,
    Cphase,
    Ms,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::H => 1,
            GateKind::Cnot | GateKind::Cphase | GateKind::Ms => 2,
        }
    }

    pub fn is_parameterized(self) -> bool {
        !matches!(self, GateKind::H | GateKind::Cnot)
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::H => "h",
            GateKind::Cnot => "cnot",
            GateKind::Cphase => "cphase",
            GateKind::Ms => "ms",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "rx" => GateKind::Rx,
            "ry" => GateKind::Ry,
            "rz" => GateKind::Rz,
            "h" => GateKind::H,
            "cnot" => GateKind::Cnot,
            "cphase" => GateKind::Cphase,
            "ms" => GateKind::Ms,
            _ => return None,
        })
    }
}

/// Where a parameterized gate takes its angle from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    /// Index into the enclosing parameter vector (θ for prep, μ for meas).
    Slot(usize),
    /// Constant, non-variational angle.
    Fixed(f64),
}

/// One gate in a circuit blueprint.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSpec {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub angle: Option<Angle>,
}

impl GateSpec {
    pub fn slotted(kind: GateKind, targets: Vec<usize>, slot: usize) -> Self {
        debug_assert!(kind.is_parameterized());
        GateSpec {
            kind,
            targets,
            angle: Some(Angle::Slot(slot)),
        }
    }

    pub fn fixed(kind: GateKind, targets: Vec<usize>, value: f64) -> Self {
        debug_assert!(kind.is_parameterized());
        GateSpec {
            kind,
            targets,
            angle: Some(Angle::Fixed(value)),
        }
    }

    pub fn bare(kind: GateKind, targets: Vec<usize>) -> Self {
        debug_assert!(!kind.is_parameterized());
        GateSpec {
            kind,
            targets,
            angle: None,
        }
    }

    /// Resolve the angle against a parameter vector; unparameterized gates
    /// report 0.
    pub fn angle_value(&self, params: &[f64]) -> f64 {
        match self.angle {
            Some(Angle::Slot(s)) => params[s],
            Some(Angle::Fixed(v)) => v,
            None => 0.0,
        }
    }
}

/// The unitary for a gate kind at a given angle (ignored for H and CNOT).
pub fn gate_matrix(kind: GateKind, value: f64) -> Result<ComplexMatrix> {
    let m = match kind {
        GateKind::Rx => {
            let (s, c) = (value / 2.0).sin_cos();
            ComplexMatrix::from_rows(
                2,
                2,
                vec![
                    C64::new(c, 0.0),
                    C64::new(0.0, -s),
                    C64::new(0.0, -s),
                    C64::new(c, 0.0),
                ],
            )?
        }
        GateKind::Ry => {
            let (s, c) = (value / 2.0).sin_cos();
            ComplexMatrix::from_rows(
                2,
                2,
                vec![
                    C64::new(c, 0.0),
                    C64::new(-s, 0.0),
                    C64::new(s, 0.0),
                    C64::new(c, 0.0),
                ],
            )?
        }
        GateKind::Rz => {
            let half = value / 2.0;
            ComplexMatrix::diagonal(&[C64::cis(-half), C64::cis(half)])
        }
        GateKind::H => {
            let h = 1.0 / 2.0_f64.sqrt();
            ComplexMatrix::from_rows(
                2,
                2,
                vec![
                    C64::new(h, 0.0),
                    C64::new(h, 0.0),
                    C64::new(h, 0.0),
                    C64::new(-h, 0.0),
                ],
            )?
        }
        GateKind::Cnot => {
            let mut m = ComplexMatrix::zeros(4, 4);
            m[(0, 0)] = C64::ONE;
            m[(1, 1)] = C64::ONE;
            m[(2, 3)] = C64::ONE;
            m[(3, 2)] = C64::ONE;
            m
        }
        GateKind::Cphase => {
            ComplexMatrix::diagonal(&[C64::ONE, C64::ONE, C64::ONE, C64::cis(value)])
        }
        GateKind::Ms => {
            let (s, c) = (value / 2.0).sin_cos();
            let mut m = ComplexMatrix::zeros(4, 4);
            for i in 0..4 {
                m[(i, i)] = C64::new(c, 0.0);
                m[(i, 3 - i)] = C64::new(0.0, -s);
            }
            m
        }
    };
    Ok(m)
}
