use serde::Serialize;

use super::{wilson_interval, HarnessError};

/// Per-label tallies of a batch of trials.
///
/// `Σ counts + unresolved == n_trials` always holds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutcomeCounts {
    labels: Vec<String>,
    counts: Vec<u64>,
    n_trials: u64,
    unresolved: u64,
    seed: u64,
}

impl OutcomeCounts {
    pub fn new(labels: Vec<String>, seed: u64) -> Self {
        let counts = vec![0; labels.len()];
        Self {
            labels,
            counts,
            n_trials: 0,
            unresolved: 0,
            seed,
        }
    }

    pub fn from_counts(labels: Vec<String>, counts: Vec<u64>, unresolved: u64, seed: u64) -> Result<Self, HarnessError> {
        if labels.len() != counts.len() {
            return Err(HarnessError::LabelMismatch {
                labels: labels.len(),
                probabilities: counts.len(),
            });
        }
        let n_trials = counts.iter().sum::<u64>() + unresolved;
        Ok(Self {
            labels,
            counts,
            n_trials,
            unresolved,
            seed,
        })
    }

    /// Records one trial; `None` is an unresolved outcome.
    pub fn record(&mut self, outcome: Option<usize>) {
        match outcome {
            Some(i) => self.counts[i] += 1,
            None => self.unresolved += 1,
        }
        self.n_trials += 1;
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, label: usize) -> u64 {
        self.counts[label]
    }

    pub fn count_of(&self, label: &str) -> Option<u64> {
        self.labels.iter().position(|l| l == label).map(|i| self.counts[i])
    }

    pub fn n_trials(&self) -> u64 {
        self.n_trials
    }

    pub fn unresolved(&self) -> u64 {
        self.unresolved
    }

    pub fn resolved(&self) -> u64 {
        self.n_trials - self.unresolved
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `(count, n_trials)` as an exact ratio.
    pub fn fraction(&self, label: usize) -> (u64, u64) {
        (self.counts[label], self.n_trials)
    }

    /// `count / n_trials`.
    pub fn proportion(&self, label: usize) -> f64 {
        if self.n_trials == 0 {
            return 0.0;
        }
        self.counts[label] as f64 / self.n_trials as f64
    }

    pub fn proportions(&self) -> Vec<f64> {
        (0..self.counts.len()).map(|i| self.proportion(i)).collect()
    }

    pub fn wilson(&self, label: usize, confidence: f64) -> Result<(f64, f64), HarnessError> {
        wilson_interval(self.counts[label], self.n_trials, confidence)
    }

    pub fn is_consistent(&self) -> bool {
        self.counts.iter().sum::<u64>() + self.unresolved == self.n_trials
    }
}
