use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use super::{HarnessError, OutcomeCounts};
use crate::tolerances;

/// Smallest expected cell count accepted by the chi-square test.
pub const MIN_EXPECTED_COUNT: f64 = 5.0;

/// Wilson score interval for a binomial proportion `k / n`.
pub fn wilson_interval(k: u64, n: u64, confidence: f64) -> Result<(f64, f64), HarnessError> {
    if n == 0 || k > n {
        return Err(HarnessError::InvalidProportion { k, n });
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(HarnessError::InvalidConfidence(confidence));
    }
    let z = normal_quantile(0.5 + confidence / 2.0);
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (center + half).min(1.0) };
    Ok((lo, hi))
}

pub(crate) fn normal_quantile(p: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(p)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub critical_value: f64,
    pub dof: usize,
    pub alpha: f64,
    pub pass: bool,
}

/// Pearson goodness-of-fit of the resolved counts against `expected`.
///
/// Unresolved trials are excluded; expected counts are `expected[i]` times
/// the number of resolved trials.
pub fn chi_square_gof(counts: &OutcomeCounts, expected: &[f64], alpha: f64) -> Result<ChiSquareResult, HarnessError> {
    let observed = counts.counts();
    if observed.len() != expected.len() || observed.len() < 2 {
        return Err(HarnessError::LabelMismatch {
            labels: observed.len(),
            probabilities: expected.len(),
        });
    }
    if expected.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
        return Err(HarnessError::InvalidProbabilities);
    }
    let sum: f64 = expected.iter().sum();
    if (sum - 1.0).abs() > tolerances::PROBABILITY_SUM {
        return Err(HarnessError::InvalidProbabilities);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(HarnessError::InvalidConfidence(alpha));
    }
    let total = counts.resolved() as f64;
    let mut statistic = 0.0;
    for (i, (&obs, &p)) in observed.iter().zip(expected).enumerate() {
        let e = p * total;
        if e < MIN_EXPECTED_COUNT {
            return Err(HarnessError::UnderSampled { cell: i, expected: e });
        }
        let d = obs as f64 - e;
        statistic += d * d / e;
    }
    let dof = observed.len() - 1;
    let critical_value = ChiSquared::new(dof as f64)
        .expect("positive dof")
        .inverse_cdf(1.0 - alpha);
    Ok(ChiSquareResult {
        statistic,
        critical_value,
        dof,
        alpha,
        pass: statistic <= critical_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(values: &[u64]) -> OutcomeCounts {
        let labels = (0..values.len()).map(|i| i.to_string()).collect();
        OutcomeCounts::from_counts(labels, values.to_vec(), 0, 0).unwrap()
    }

    #[test]
    fn wilson_zero_successes_has_zero_lower_bound() {
        let (lo, hi) = wilson_interval(0, 50, 0.95).unwrap();
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0);
    }

    #[test]
    fn wilson_half_is_symmetric() {
        for n in [2u64, 10, 1000, 12345 * 2] {
            let (lo, hi) = wilson_interval(n / 2, n, 0.95).unwrap();
            assert!(((lo + hi) / 2.0 - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn wilson_all_successes() {
        // n / (n + z²) with z = 1.959964
        let (lo, hi) = wilson_interval(100, 100, 0.95).unwrap();
        assert!((lo - 0.9630).abs() < 1e-3, "{lo}");
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn wilson_rejects_bad_input() {
        assert!(wilson_interval(3, 2, 0.95).is_err());
        assert!(wilson_interval(0, 0, 0.95).is_err());
        assert!(wilson_interval(1, 2, 1.5).is_err());
    }

    #[test]
    fn proportional_counts_give_zero_statistic() {
        let r = chi_square_gof(&counts(&[25, 75]), &[0.25, 0.75], 0.01).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn lopsided_counts_fail() {
        let r = chi_square_gof(&counts(&[70, 30]), &[0.5, 0.5], 0.01).unwrap();
        assert!((r.statistic - 16.0).abs() < 1e-12);
        assert!(!r.pass);
    }

    #[test]
    fn near_even_counts_pass() {
        let r = chi_square_gof(&counts(&[52, 48]), &[0.5, 0.5], 0.01).unwrap();
        assert!((r.statistic - 0.16).abs() < 1e-12);
        assert!(r.pass);
    }

    #[test]
    fn under_sampled_cells_rejected() {
        let err = chi_square_gof(&counts(&[3, 5]), &[0.5, 0.5], 0.01).unwrap_err();
        assert!(matches!(err, HarnessError::UnderSampled { .. }));
    }
}
