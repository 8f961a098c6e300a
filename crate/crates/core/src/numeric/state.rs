use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{NumericError, Result};

/// Complex amplitude vector over a tensor-factorized Hilbert space.
///
/// `dims` records the factorization; its product always equals the number
/// of amplitudes. The first factor is the most significant index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    dims: Vec<usize>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>, dims: Vec<usize>) -> Result<Self> {
        let product: usize = dims.iter().product();
        if dims.is_empty() || dims.contains(&0) || product != amplitudes.len() {
            return Err(NumericError::BadFactorization {
                dims,
                len: amplitudes.len(),
            });
        }
        Ok(Self { amplitudes, dims })
    }

    /// A single-factor state.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        Self::new(amplitudes, vec![len])
    }

    /// Real amplitudes, single factor.
    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::from_amplitudes(amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Computational basis state `|index⟩` of a single factor of size `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(NumericError::IndexOutOfRange { index, dim });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self::new(amplitudes, vec![dim])
    }

    /// Basis state of a factorized space, one digit per factor.
    pub fn product_basis(dims: &[usize], digits: &[usize]) -> Result<Self> {
        if dims.len() != digits.len() {
            return Err(NumericError::DimensionMismatch {
                expected: dims.len(),
                found: digits.len(),
            });
        }
        let mut index = 0;
        for (&d, &k) in dims.iter().zip(digits) {
            if k >= d {
                return Err(NumericError::IndexOutOfRange { index: k, dim: d });
            }
            index = index * d + k;
        }
        let total = dims.iter().product();
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); total];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self::new(amplitudes, dims.to_vec())
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Same amplitudes under a different factorization.
    pub fn with_dims(self, dims: Vec<usize>) -> Result<Self> {
        Self::new(self.amplitudes, dims)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(NumericError::ZeroNorm);
        }
        let inv = 1.0 / norm;
        for c in &mut self.amplitudes {
            *c *= inv;
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.len() != other.len() {
            return Err(NumericError::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `self ⊗ other`; the factorizations are concatenated.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut amplitudes = Vec::with_capacity(self.len() * other.len());
        for a in &self.amplitudes {
            amplitudes.extend(other.amplitudes.iter().map(|b| a * b));
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        StateVector { amplitudes, dims }
    }

    pub fn scaled(&self, factor: Complex64) -> StateVector {
        StateVector {
            amplitudes: self.amplitudes.iter().map(|c| c * factor).collect(),
            dims: self.dims.clone(),
        }
    }

    /// Largest entrywise distance to `other`.
    pub fn max_distance(&self, other: &StateVector) -> Result<f64> {
        if self.len() != other.len() {
            return Err(NumericError::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `1 − |⟨self|other⟩|²` for normalized inputs: zero iff both describe the same ray.
    pub fn infidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(1.0 - self.inner(other)?.norm_sqr())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorization_must_match_length() {
        let amps = vec![Complex64::new(1.0, 0.0); 6];
        assert!(StateVector::new(amps.clone(), vec![2, 3]).is_ok());
        assert!(matches!(
            StateVector::new(amps, vec![2, 2]),
            Err(NumericError::BadFactorization { .. })
        ));
    }

    #[test]
    fn normalize_gives_unit_norm() {
        let mut s = StateVector::from_real(&[3.0, 4.0]).unwrap();
        s.normalize().unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((s.inner(&s).unwrap().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_vector_cannot_be_normalized() {
        let s = StateVector::from_real(&[0.0, 0.0]).unwrap();
        assert_eq!(s.normalized(), Err(NumericError::ZeroNorm));
    }

    #[test]
    fn inner_rejects_mismatched_dimensions() {
        let a = StateVector::basis(2, 0).unwrap();
        let b = StateVector::basis(3, 0).unwrap();
        assert!(matches!(a.inner(&b), Err(NumericError::DimensionMismatch { .. })));
    }

    #[test]
    fn product_basis_uses_first_factor_as_most_significant() {
        let s = StateVector::product_basis(&[2, 3], &[1, 2]).unwrap();
        assert_eq!(s.amplitudes()[5], Complex64::new(1.0, 0.0));
        let t = StateVector::basis(2, 1).unwrap().tensor(&StateVector::basis(3, 2).unwrap());
        assert_eq!(s, t);
    }
}
