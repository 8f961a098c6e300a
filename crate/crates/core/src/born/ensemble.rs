use serde::Serialize;

use super::{BornError, Result};
use crate::numeric::{OperatorMatrix, StateVector};
use crate::tolerances;

/// An operator on `H_app ⊗ H_env` under which the ensemble is declared closed.
#[derive(Debug, Clone)]
pub struct DeclaredSymmetry {
    pub name: String,
    pub u_rest: OperatorMatrix,
}

/// Finite ensemble `E` of apparatus/environment states.
///
/// Construction checks closure: for every declared `V` and member `χ`,
/// `Vχ` equals some member entrywise to within the closure tolerance.
#[derive(Debug, Clone)]
pub struct Ensemble {
    members: Vec<StateVector>,
    declared: Vec<DeclaredSymmetry>,
    seed: u64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ClosureReport {
    pub symmetry: String,
    /// `images[i]` is the member equal to `V χ_i`.
    pub images: Vec<usize>,
    pub is_permutation: bool,
}

impl Ensemble {
    pub fn new(members: Vec<StateVector>, declared: Vec<DeclaredSymmetry>, seed: u64) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(BornError::InvalidEnsemble("ensemble is empty".into()));
        };
        let dim = first.len();
        for (i, m) in members.iter().enumerate() {
            if m.len() != dim {
                return Err(BornError::InvalidEnsemble(format!("member {i} has dimension {}", m.len())));
            }
            if (m.norm_sqr() - 1.0).abs() > tolerances::PROBABILITY_SUM {
                return Err(BornError::InvalidEnsemble(format!("member {i} is not normalized")));
            }
        }
        for d in &declared {
            if d.u_rest.dim() != dim {
                return Err(BornError::InvalidEnsemble(format!(
                    "declared symmetry {} has dimension {}",
                    d.name,
                    d.u_rest.dim()
                )));
            }
        }
        let ens = Self { members, declared, seed };
        for d in &ens.declared {
            ens.closure(&d.name, &d.u_rest)?;
        }
        Ok(ens)
    }

    pub fn members(&self) -> &[StateVector] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn declared_symmetries(&self) -> &[DeclaredSymmetry] {
        &self.declared
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rest_dim(&self) -> usize {
        self.members[0].len()
    }

    /// Index of the member equal to `state`, if any.
    pub fn find(&self, state: &StateVector) -> Option<usize> {
        self.members.iter().position(|m| {
            m.max_distance(state)
                .map(|d| d <= tolerances::ENSEMBLE_CLOSURE)
                .unwrap_or(false)
        })
    }

    /// Maps each member through `v` and locates the image in the ensemble.
    pub fn closure(&self, name: &str, v: &OperatorMatrix) -> Result<ClosureReport> {
        if v.dim() != self.rest_dim() {
            return Err(BornError::Dimension {
                what: "ensemble symmetry",
                expected: self.rest_dim(),
                found: v.dim(),
            });
        }
        let mut images = Vec::with_capacity(self.len());
        for (i, m) in self.members.iter().enumerate() {
            let image = v.apply(m)?;
            match self.find(&image) {
                Some(j) => images.push(j),
                None => {
                    return Err(BornError::NotClosed {
                        symmetry: name.to_string(),
                        member: i,
                    })
                }
            }
        }
        let mut seen = vec![false; images.len()];
        for &j in &images {
            seen[j] = true;
        }
        Ok(ClosureReport {
            symmetry: name.to_string(),
            is_permutation: seen.iter().all(|&s| s),
            images,
        })
    }
}
