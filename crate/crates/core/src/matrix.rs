//! Dense complex matrices in row-major order, with the Kronecker product and
//! a cyclic-Jacobi hermitian eigensolver. Everything here is dependency-free
//! and sized for desk-scale simulation (dimensions up to a few hundred).

use crate::tolerance::Tolerances;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = C64::ONE;
        }
        m
    }

    /// Build from row-major entries; entry count must equal rows*cols.
    pub fn from_rows(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Entrywise complex conjugate (no transpose).
    pub fn conjugate(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        let mut out = vec![C64::ZERO; self.rows];
        for i in 0..self.rows {
            let mut acc = C64::ZERO;
            for j in 0..self.cols {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entrywise deviation from another matrix.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest |a_ij - conj(a_ji)| over the matrix.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: &Tolerances) -> bool {
        self.rows == self.cols && self.hermitian_deviation() <= tol.hermitian
    }

    /// Max deviation of u†u from the identity; zero for exact unitaries.
    pub fn unitary_deviation(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        self.dagger()
            .matmul(self)
            .max_abs_diff(&Self::identity(self.rows))
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Kronecker product a ⊗ b.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.rows * b.rows, a.cols * b.cols);
    for ia in 0..a.rows {
        for ja in 0..a.cols {
            let f = a[(ia, ja)];
            if f == C64::ZERO {
                continue;
            }
            for ib in 0..b.rows {
                for jb in 0..b.cols {
                    out[(ia * b.rows + ib, ja * b.cols + jb)] = f * b[(ib, jb)];
                }
            }
        }
    }
    out
}

/// Eigendecomposition of a hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as the columns of the second matrix.
pub fn eigh(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    eigh_with(m, &Tolerances::DEFAULT)
}

pub fn eigh_with(m: &ComplexMatrix, tol: &Tolerances) -> Result<(Vec<f64>, ComplexMatrix)> {
    if m.rows != m.cols {
        return Err(Error::ShapeMismatch(format!(
            "eigh needs a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let dev = m.hermitian_deviation();
    // eigh admits looser input than the hermitian flag on stored matrices
    if dev > tol.hermitian.max(1e-10) {
        return Err(Error::NotHermitian { deviation: dev });
    }

    let dim = m.rows;
    let mut a = m.clone();
    // Symmetrize away the sub-tolerance asymmetry so rotations stay exact.
    for i in 0..dim {
        for j in 0..dim {
            let avg = 0.5 * (a[(i, j)] + a[(j, i)].conj());
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
    }
    let mut vecs = ComplexMatrix::identity(dim);
    let scale = a.max_abs().max(1.0);
    let stop = 1e-14 * scale;

    for _sweep in 0..100 {
        let mut off: f64 = 0.0;
        for p in 0..dim {
            for q in (p + 1)..dim {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= stop {
            break;
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= stop * 1e-2 {
                    continue;
                }
                // Phase that makes the pivot real, then a classic 2x2 rotation.
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (app - aqq) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let cs = C64::new(c, 0.0);
                let sp = phase * s; // s·e^{iγ}

                // a ← J† a J with J[p][p]=c, J[p][q]=-s·e^{iγ}, J[q][p]=s·e^{-iγ}, J[q][q]=c
                for k in 0..dim {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * cs + akq * sp.conj();
                    a[(k, q)] = -akp * sp + akq * cs;
                }
                for k in 0..dim {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = cs * apk + sp * aqk;
                    a[(q, k)] = -sp.conj() * apk + cs * aqk;
                }
                a[(p, q)] = C64::ZERO;
                a[(q, p)] = C64::ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

                for k in 0..dim {
                    let vkp = vecs[(k, p)];
                    let vkq = vecs[(k, q)];
                    vecs[(k, p)] = vkp * cs + vkq * sp.conj();
                    vecs[(k, q)] = -vkp * sp + vkq * cs;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut sorted = ComplexMatrix::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..dim {
            sorted[(k, dst)] = vecs[(k, src)];
        }
    }
    Ok((values, sorted))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_rows(2, 2, vec![C64::ZERO, C64::ONE, C64::ONE, C64::ZERO]).unwrap()
    }

    fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::diagonal(&[C64::ONE, -C64::ONE])
    }

    #[test]
    fn kron_identities() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_pauli_x_with_identity() {
        let got = kron(&pauli_x(), &ComplexMatrix::identity(2));
        for i in 0..4 {
            for j in 0..4 {
                let expect = if matches!((i, j), (0, 2) | (1, 3) | (2, 0) | (3, 1)) {
                    C64::ONE
                } else {
                    C64::ZERO
                };
                assert_eq!(got[(i, j)], expect, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn kron_of_diagonals() {
        let a = ComplexMatrix::diagonal(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let b = ComplexMatrix::diagonal(&[c(3.0, 0.0), c(4.0, 0.0)]);
        let expect = ComplexMatrix::diagonal(&[c(3.0, 0.0), c(4.0, 0.0), c(6.0, 0.0), c(8.0, 0.0)]);
        assert_eq!(kron(&a, &b), expect);
    }

    #[test]
    fn eigh_pauli_z() {
        let (vals, _) = eigh(&pauli_z()).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigh_pauli_x_eigenvectors() {
        let (vals, vecs) = eigh(&pauli_x()).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        // column 0 ∝ (1, -1)/√2, column 1 ∝ (1, 1)/√2
        let ratio0 = vecs[(1, 0)] / vecs[(0, 0)];
        let ratio1 = vecs[(1, 1)] / vecs[(0, 1)];
        assert!((ratio0 + C64::ONE).norm() < 1e-10);
        assert!((ratio1 - C64::ONE).norm() < 1e-10);
    }

    #[test]
    fn eigh_fully_dephased_ghz4() {
        // Full dephasing after every CNOT leaves an equal classical mixture of
        // |0000> and |1111>.
        let mut rho = ComplexMatrix::zeros(16, 16);
        rho[(0, 0)] = c(0.5, 0.0);
        rho[(15, 15)] = c(0.5, 0.0);
        let (vals, _) = eigh(&rho).unwrap();
        for v in &vals[..14] {
            assert!(v.abs() < 1e-12);
        }
        assert!((vals[14] - 0.5).abs() < 1e-12);
        assert!((vals[15] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let m =
            ComplexMatrix::from_rows(2, 2, vec![C64::ONE, C64::ONE, -C64::ONE, C64::ONE]).unwrap();
        assert!(matches!(eigh(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eigh_reconstructs_random_hermitian() {
        // A fixed non-trivial hermitian matrix: A = B + B†.
        let dim = 6;
        let mut b = ComplexMatrix::zeros(dim, dim);
        let mut x = 0.3_f64;
        for i in 0..dim {
            for j in 0..dim {
                x = (x * 97.0 + 13.7).rem_euclid(2.0) - 1.0;
                let re = x;
                x = (x * 97.0 + 13.7).rem_euclid(2.0) - 1.0;
                b[(i, j)] = c(re, x);
            }
        }
        let a = b.add(&b.dagger());
        let (vals, vecs) = eigh(&a).unwrap();
        let mut recon = ComplexMatrix::zeros(dim, dim);
        for k in 0..dim {
            let col = vecs.column(k);
            for i in 0..dim {
                for j in 0..dim {
                    recon[(i, j)] += col[i] * col[j].conj() * vals[k];
                }
            }
        }
        assert!(recon.max_abs_diff(&a) < 1e-8);
    }
}
