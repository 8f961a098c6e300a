use num_complex::Complex64;

use super::{NumericError, Result, StateVector, MAX_DIMENSION};
use crate::tolerances;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dense complex square matrix, row-major.
///
/// The `hermitian` and `unitary` flags are only ever set through
/// [`OperatorMatrix::mark_hermitian`] / [`OperatorMatrix::mark_unitary`],
/// which validate the property first.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    dim: usize,
    entries: Vec<Complex64>,
    hermitian: bool,
    unitary: bool,
}

impl OperatorMatrix {
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(NumericError::NotSquare {
                dim,
                entries: entries.len(),
            });
        }
        if dim > MAX_DIMENSION {
            return Err(NumericError::TooLarge(dim));
        }
        Ok(Self {
            dim,
            entries,
            hermitian: false,
            unitary: false,
        })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(NumericError::NotSquare {
                    dim,
                    entries: row.len() * dim,
                });
            }
            entries.extend_from_slice(row);
        }
        Self::new(dim, entries)
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![ZERO; dim * dim],
            hermitian: true,
            unitary: false,
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m.entries[k * dim + k] = ONE;
        }
        m.unitary = true;
        m
    }

    pub fn from_diagonal(diagonal: &[Complex64]) -> Self {
        let dim = diagonal.len();
        let mut m = Self::zeros(dim);
        for (k, &d) in diagonal.iter().enumerate() {
            m.entries[k * dim + k] = d;
        }
        m.hermitian = diagonal.iter().all(|d| d.im == 0.0);
        m
    }

    /// Permutation matrix sending basis state `k` to `perm[k]`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let dim = perm.len();
        let mut seen = vec![false; dim];
        let mut m = Self::zeros(dim);
        for (k, &target) in perm.iter().enumerate() {
            if target >= dim || seen[target] {
                return Err(NumericError::IndexOutOfRange { index: target, dim });
            }
            seen[target] = true;
            m.entries[target * dim + k] = ONE;
        }
        m.hermitian = false;
        m.unitary = true;
        Ok(m)
    }

    pub fn pauli_x() -> Self {
        Self::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).expect("2x2")
    }

    pub fn pauli_y() -> Self {
        Self::from_rows(&[vec![ZERO, -I], vec![I, ZERO]]).expect("2x2")
    }

    pub fn pauli_z() -> Self {
        Self::from_real_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).expect("2x2")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn row(&self, row: usize) -> &[Complex64] {
        &self.entries[row * self.dim..(row + 1) * self.dim]
    }

    pub fn is_marked_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_marked_unitary(&self) -> bool {
        self.unitary
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// `max |A − A†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let d = (self.entries[i * n + j] - self.entries[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// `max |A† A − I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let product = self.adjoint().matmul(self).expect("same dimension");
        product.max_deviation(&Self::identity(self.dim)).expect("same dimension")
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    pub fn mark_hermitian(mut self) -> Result<Self> {
        let defect = self.hermiticity_defect();
        if defect > tolerances::HERMITIAN {
            return Err(NumericError::NotHermitian(defect));
        }
        self.hermitian = true;
        Ok(self)
    }

    pub fn mark_unitary(mut self) -> Result<Self> {
        let defect = self.unitarity_defect();
        if defect > tolerances::UNITARY {
            return Err(NumericError::NotUnitary(defect));
        }
        self.unitary = true;
        Ok(self)
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut entries = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.entries[i * n + j].conj();
            }
        }
        Self {
            dim: n,
            entries,
            hermitian: self.hermitian,
            unitary: self.unitary,
        }
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(NumericError::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    fn nonzeros(&self) -> usize {
        self.entries.iter().filter(|c| **c != ZERO).count()
    }

    /// Row-oriented product that skips zero entries of `self`.
    fn matmul_left_sparse(&self, other: &Self) -> Self {
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let out_row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.entries[k * n..(k + 1) * n];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Self {
            dim: n,
            entries: out,
            hermitian: false,
            unitary: self.unitary && other.unitary,
        }
    }

    /// `self · other`. Cost scales with the number of non-zeros of the
    /// sparser operand.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        if self.nonzeros() <= other.nonzeros() {
            Ok(self.matmul_left_sparse(other))
        } else {
            // (B† A†)† keeps the sparse factor on the left.
            let mut m = other.adjoint().matmul_left_sparse(&self.adjoint()).adjoint();
            m.hermitian = false;
            m.unitary = self.unitary && other.unitary;
            Ok(m)
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            hermitian: false,
            unitary: false,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut m = self.zip_with(other, |a, b| a + b)?;
        m.hermitian = self.hermitian && other.hermitian;
        Ok(m)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut m = self.zip_with(other, |a, b| a - b)?;
        m.hermitian = self.hermitian && other.hermitian;
        Ok(m)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|c| c * factor).collect(),
            hermitian: self.hermitian && factor.im == 0.0,
            unitary: self.unitary && (factor.norm() - 1.0).abs() < f64::EPSILON,
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    /// `AB − BA`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise distance to `other`.
    pub fn max_deviation(&self, other: &Self) -> Result<f64> {
        self.check_same_dim(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|k| self.entries[k * self.dim + k]).sum()
    }

    /// `op |s⟩`; the state keeps its factorization.
    pub fn apply(&self, s: &StateVector) -> Result<StateVector> {
        if s.len() != self.dim {
            return Err(NumericError::DimensionMismatch {
                expected: self.dim,
                found: s.len(),
            });
        }
        let amplitudes = self.apply_slice(s.amplitudes());
        StateVector::new(amplitudes, s.dims().to_vec())
    }

    pub(crate) fn apply_slice(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        (0..n)
            .map(|i| {
                self.entries[i * n..(i + 1) * n]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `⟨s|op|s⟩`.
    pub fn expectation(&self, s: &StateVector) -> Result<Complex64> {
        s.inner(&self.apply(s)?)
    }

    pub(crate) fn from_parts_unchecked(dim: usize, entries: Vec<Complex64>) -> Self {
        Self {
            dim,
            entries,
            hermitian: false,
            unitary: false,
        }
    }
}

/// Kronecker product `a ⊗ b`: entry `(i·n + k, j·n + l) = a[i,j]·b[k,l]`.
pub fn tensor_product(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    let (m, n) = (a.dim, b.dim);
    let dim = m * n;
    if dim > MAX_DIMENSION {
        return Err(NumericError::TooLarge(dim));
    }
    let mut entries = vec![ZERO; dim * dim];
    for i in 0..m {
        for j in 0..m {
            let aij = a.entries[i * m + j];
            if aij == ZERO {
                continue;
            }
            for k in 0..n {
                let row = (i * n + k) * dim + j * n;
                for l in 0..n {
                    entries[row + l] = aij * b.entries[k * n + l];
                }
            }
        }
    }
    Ok(OperatorMatrix {
        dim,
        entries,
        hermitian: a.hermitian && b.hermitian,
        unitary: a.unitary && b.unitary,
    })
}
