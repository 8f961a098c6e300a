use num_complex::Complex64;
use serde::Serialize;

use super::{equal_amplitude_theorem, BornError, Result};
use crate::numeric::StateVector;
use crate::tolerances;

/// Largest common denominator searched for squared moduli.
pub const MAX_DENOMINATOR: u64 = 4096;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FineGrained {
    /// `|α_j|² = weights[j] / denominator`.
    pub weights: Vec<u64>,
    pub denominator: u64,
    /// Branches of equal modulus counted under each outcome.
    pub branch_counts: Vec<u64>,
    pub probabilities: Vec<f64>,
}

/// Smallest `M ≤ 4096` with every `|α_j|²·M` an integer, as `(m, M)`.
pub fn rational_weights(amplitudes: &[Complex64]) -> Result<(Vec<u64>, u64)> {
    if amplitudes.is_empty() || amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
        return Err(BornError::InvalidAmplitudes("amplitudes must be a non-empty list of finite numbers".into()));
    }
    let p: Vec<f64> = amplitudes.iter().map(|a| a.norm_sqr()).collect();
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > tolerances::PROBABILITY_SUM {
        return Err(BornError::NotNormalized(total));
    }
    for m_total in 1..=MAX_DENOMINATOR {
        let mf = m_total as f64;
        let weights: Vec<u64> = p.iter().map(|&x| (x * mf).round() as u64).collect();
        let exact = p
            .iter()
            .zip(&weights)
            .all(|(&x, &w)| (x - w as f64 / mf).abs() <= tolerances::FINE_GRAIN);
        if exact && weights.iter().sum::<u64>() == m_total {
            return Ok((weights, m_total));
        }
    }
    Err(BornError::Irrational)
}

/// Splits outcome `j` into `m_j` equal-modulus branches on an ancilla of
/// size `M` and counts them with the equal-amplitude result.
pub fn fine_grain(amplitudes: &[Complex64]) -> Result<FineGrained> {
    let (weights, denominator) = rational_weights(amplitudes)?;
    let n = amplitudes.len();
    let m = denominator as usize;
    let scale = 1.0 / (denominator as f64).sqrt();
    let mut fine = vec![Complex64::new(0.0, 0.0); n * m];
    let mut offset = 0;
    for (j, (&w, a)) in weights.iter().zip(amplitudes).enumerate() {
        let phase = if a.norm() > 0.0 { a / a.norm() } else { Complex64::new(1.0, 0.0) };
        for r in 0..w as usize {
            fine[j * m + offset + r] = phase * scale;
        }
        offset += w as usize;
    }
    let state = StateVector::new(fine, vec![n, m])?;

    // every non-zero branch has the same modulus, so each carries 1/M
    let per_branch = equal_amplitude_theorem(m)?;
    let target = 1.0 / denominator as f64;
    let mut branch_counts = vec![0u64; n];
    let mut branch = 0;
    for (idx, c) in state.amplitudes().iter().enumerate() {
        let p = c.norm_sqr();
        if p == 0.0 {
            continue;
        }
        if (p - target).abs() > tolerances::FINE_GRAIN || (per_branch[branch] - target).abs() > tolerances::FINE_GRAIN {
            return Err(BornError::InvalidAmplitudes("fine-grained branches are not of equal modulus".into()));
        }
        branch_counts[idx / m] += 1;
        branch += 1;
    }
    let probabilities = branch_counts.iter().map(|&c| c as f64 / denominator as f64).collect();
    Ok(FineGrained {
        weights,
        denominator,
        branch_counts,
        probabilities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(xs: &[f64]) -> Vec<Complex64> {
        xs.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn one_third_two_thirds() {
        let f = fine_grain(&real(&[(1.0f64 / 3.0).sqrt(), (2.0f64 / 3.0).sqrt()])).unwrap();
        assert_eq!((f.weights.clone(), f.denominator), (vec![1, 2], 3));
        assert_eq!(f.branch_counts, vec![1, 2]);
        assert!((f.probabilities[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((f.probabilities[1] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn equal_amplitudes_reduce_to_uniform() {
        let a = 0.5;
        let f = fine_grain(&[
            Complex64::new(a, 0.0),
            Complex64::new(0.0, a),
            Complex64::new(-a, 0.0),
            Complex64::from_polar(a, 1.0),
        ])
        .unwrap();
        assert_eq!(f.denominator, 4);
        assert_eq!(f.probabilities, vec![0.25; 4]);
    }

    #[test]
    fn degenerate_case() {
        let f = fine_grain(&real(&[1.0, 0.0])).unwrap();
        assert_eq!(f.probabilities, vec![1.0, 0.0]);
        assert_eq!(f.denominator, 1);
    }

    #[test]
    fn irrational_weights_rejected() {
        let p = 1.0 / std::f64::consts::PI;
        let err = fine_grain(&real(&[p.sqrt(), (1.0 - p).sqrt()])).unwrap_err();
        assert_eq!(err, BornError::Irrational);
    }

    #[test]
    fn unnormalized_rejected() {
        assert!(matches!(fine_grain(&real(&[1.0, 1.0])), Err(BornError::NotNormalized(_))));
    }
}
