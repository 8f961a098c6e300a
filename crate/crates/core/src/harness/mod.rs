//! Seeded randomness, noise densities, trial execution and the two
//! statistical gates used by the experiments.

mod counts;
mod noise;
mod rng;
mod stats;

pub use counts::OutcomeCounts;
pub use noise::NoiseDistribution;
pub use rng::RngStream;
pub use stats::{chi_square_gof, wilson_interval, ChiSquareResult, MIN_EXPECTED_COUNT};

use rayon::prelude::*;
use thiserror::Error;

use crate::quadrature::QuadratureError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("invalid noise distribution: {0}")]
    InvalidNoise(String),
    #[error("density integrates to {0}, not 1")]
    NotNormalized(f64),
    #[error("invalid proportion {k}/{n}")]
    InvalidProportion { k: u64, n: u64 },
    #[error("confidence/alpha must lie strictly between 0 and 1 (got {0})")]
    InvalidConfidence(f64),
    #[error("{labels} labels but {probabilities} probabilities")]
    LabelMismatch { labels: usize, probabilities: usize },
    #[error("expected probabilities must lie in [0, 1] and sum to 1")]
    InvalidProbabilities,
    #[error("cell {cell} has expected count {expected:.3}, below the minimum of 5")]
    UnderSampled { cell: usize, expected: f64 },
    #[error("trial count must be positive")]
    NoTrials,
    #[error("could not build worker pool: {0}")]
    WorkerPool(String),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Runs `n` independent trials and returns their outcomes in trial order.
///
/// Trial `i` receives `RngStream::new(seed, i)`, so the result is the same
/// for every worker count.
pub fn trial_outcomes<F>(n: u64, seed: u64, workers: usize, trial: F) -> Result<Vec<Option<usize>>, HarnessError>
where
    F: Fn(u64, &mut RngStream) -> Option<usize> + Sync,
{
    if n == 0 {
        return Err(HarnessError::NoTrials);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::WorkerPool(e.to_string()))?;
    Ok(pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = RngStream::new(seed, i);
                trial(i, &mut rng)
            })
            .collect()
    }))
}

/// [`trial_outcomes`] folded into per-label counts.
pub fn run_trials<F>(labels: &[&str], n: u64, seed: u64, workers: usize, trial: F) -> Result<OutcomeCounts, HarnessError>
where
    F: Fn(u64, &mut RngStream) -> Option<usize> + Sync,
{
    let outcomes = trial_outcomes(n, seed, workers, trial)?;
    let mut counts = OutcomeCounts::new(labels.iter().map(|s| s.to_string()).collect(), seed);
    for o in outcomes {
        counts.record(o);
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worker_count_does_not_change_results() {
        let coin = |_: u64, rng: &mut RngStream| Some((rng.uniform() < 0.3) as usize);
        let a = run_trials(&["no", "yes"], 5000, 11, 1, coin).unwrap();
        let b = run_trials(&["no", "yes"], 5000, 11, 4, coin).unwrap();
        assert_eq!(a, b);
        assert!(a.is_consistent());
    }

    #[test]
    fn zero_trials_rejected() {
        assert_eq!(
            run_trials(&["x"], 0, 1, 1, |_, _| Some(0)).unwrap_err(),
            HarnessError::NoTrials
        );
    }

    #[test]
    fn gaussian_sample_mean_within_clt_bound() {
        let d = NoiseDistribution::gaussian(0.0, 1.0).unwrap();
        let n = 100_000;
        let mut rng = RngStream::new(2024, 0);
        let mean: f64 = (0..n).map(|_| d.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 5.0 / (n as f64).sqrt(), "{mean}");
    }
}
