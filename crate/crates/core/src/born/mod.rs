//! Outcome probabilities from symmetry and counting.
//!
//! A measurement model fixes the total Hamiltonian, an evolution time and a
//! deterministic outcome map. The probability of label `i` for a system
//! state `ψ` is the fraction of ensemble members `χ` with
//! `a(U_T(ψ ⊗ χ)) = i`. Symmetries of the Hamiltonian that also preserve the
//! ensemble then force relations between these counts, and with them the
//! equal-amplitude result `p_i = 1/n`.

mod counting;
mod demo;
mod ensemble;
mod finegrain;
mod model;

pub use counting::{
    check_p1, check_p2, outcome_counts, verify_symmetry_rule, BranchTable, OutcomeSymmetry, PropertyReport,
    PropertyRow, RuleRow, SymmetryRuleReport, SymmetryValidation, Violation,
};
pub use demo::{demo_model, DemoModel, DemoSpec};
pub use ensemble::{ClosureReport, DeclaredSymmetry, Ensemble};
pub use finegrain::{fine_grain, rational_weights, FineGrained, MAX_DENOMINATOR};
pub use model::{MeasurementModel, ModelDims, OutcomeMap, SectorArgmax};

use thiserror::Error;

use crate::numeric::{NumericError, StateVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BornError {
    #[error("invalid measurement model: {0}")]
    InvalidModel(String),
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
    #[error("ensemble is not closed under {symmetry}: no member matches the image of member {member}")]
    NotClosed { symmetry: String, member: usize },
    #[error("invalid outcome symmetry: {0}")]
    InvalidSymmetry(String),
    #[error("{what} has dimension {found}, expected {expected}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("state has squared norm {0}, expected 1")]
    NotNormalized(f64),
    #[error("invalid amplitudes: {0}")]
    InvalidAmplitudes(String),
    #[error("squared moduli are not ratios m/M with M <= 4096")]
    Irrational,
    #[error("label count must be at least 1")]
    NoLabels,
    #[error("invalid demo model: {0}")]
    InvalidDemo(String),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

pub type Result<T> = std::result::Result<T, BornError>;

/// `(1/n, …, 1/n)`: the probabilities forced on `n` equal-modulus amplitudes.
pub fn equal_amplitude_theorem(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(BornError::NoLabels);
    }
    Ok(vec![1.0 / n as f64; n])
}

/// `|⟨i|ψ⟩|²`.
pub fn born_probability(psi: &StateVector, basis_index: usize) -> Result<f64> {
    let amps = psi.amplitudes();
    if basis_index >= amps.len() {
        return Err(NumericError::IndexOutOfRange {
            index: basis_index,
            dim: amps.len(),
        }
        .into());
    }
    Ok(amps[basis_index].norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_amplitude_vectors() {
        assert_eq!(equal_amplitude_theorem(1).unwrap(), vec![1.0]);
        assert_eq!(equal_amplitude_theorem(2).unwrap(), vec![0.5, 0.5]);
        assert_eq!(equal_amplitude_theorem(4).unwrap(), vec![0.25; 4]);
        assert!(equal_amplitude_theorem(0).is_err());
    }

    #[test]
    fn born_examples() {
        assert_eq!(born_probability(&StateVector::basis(3, 1).unwrap(), 1).unwrap(), 1.0);
        let r = 0.5f64.sqrt();
        let plus = StateVector::from_real(&[r, r]).unwrap();
        assert!((born_probability(&plus, 0).unwrap() - 0.5).abs() < 1e-15);
        let s = StateVector::from_real(&[(1.0f64 / 3.0).sqrt(), (2.0f64 / 3.0).sqrt()]).unwrap();
        assert!((born_probability(&s, 1).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(born_probability(&s, 2).is_err());
    }
}
