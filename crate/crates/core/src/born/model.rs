use std::fmt::Debug;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::{BornError, Result};
use crate::numeric::{matrix_exponential, OperatorMatrix, StateVector};
use crate::tolerances;

/// `a : O → I`. `None` means the state lies outside `O`.
pub trait OutcomeMap: Debug + Send + Sync {
    fn classify(&self, state: &[Complex64]) -> Option<usize>;
}

/// Argmax over per-label sector weights.
///
/// `o_j = Σ_b |x_b|² · occupation_j(b) / sites`: the mean fraction of
/// apparatus sites holding label `j`. The state is classified as the label
/// with the largest weight when it leads the runner-up by at least
/// `resolution`, and is unresolved otherwise.
#[derive(Debug, Clone)]
pub struct SectorArgmax {
    n_labels: usize,
    sites: usize,
    /// `occupation[b * n_labels + j]`.
    occupation: Vec<u8>,
    resolution: f64,
}

impl SectorArgmax {
    pub fn new(n_labels: usize, sites: usize, occupation: Vec<u8>, resolution: f64) -> Result<Self> {
        if n_labels == 0 || sites == 0 || !occupation.len().is_multiple_of(n_labels) {
            return Err(BornError::InvalidModel("occupation table does not match the label count".into()));
        }
        if !(resolution >= 0.0 && resolution.is_finite()) {
            return Err(BornError::InvalidModel(format!("resolution must be non-negative (got {resolution})")));
        }
        Ok(Self {
            n_labels,
            sites,
            occupation,
            resolution,
        })
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn dim(&self) -> usize {
        self.occupation.len() / self.n_labels
    }

    pub fn weights(&self, state: &[Complex64]) -> Vec<f64> {
        let n = self.n_labels;
        let mut w = vec![0.0; n];
        for (b, x) in state.iter().enumerate() {
            let p = x.norm_sqr();
            if p == 0.0 {
                continue;
            }
            for (j, wj) in w.iter_mut().enumerate() {
                *wj += p * self.occupation[b * n + j] as f64;
            }
        }
        let inv = 1.0 / self.sites as f64;
        w.iter_mut().for_each(|x| *x *= inv);
        w
    }

    /// Leading label (lowest index among exact ties) and its lead over the
    /// runner-up.
    pub fn leader(&self, state: &[Complex64]) -> (usize, f64) {
        leader_of(&self.weights(state))
    }
}

pub(crate) fn leader_of(w: &[f64]) -> (usize, f64) {
    let mut best = 0;
    for (j, &x) in w.iter().enumerate() {
        if x > w[best] {
            best = j;
        }
    }
    let second = w
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != best)
        .map(|(_, &x)| x)
        .fold(f64::NEG_INFINITY, f64::max);
    (best, w[best] - second)
}

impl OutcomeMap for SectorArgmax {
    fn classify(&self, state: &[Complex64]) -> Option<usize> {
        if state.len() != self.dim() {
            return None;
        }
        if self.n_labels == 1 {
            return Some(0);
        }
        let (best, gap) = self.leader(state);
        (gap >= self.resolution).then_some(best)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModelDims {
    pub sys: usize,
    pub app: usize,
    pub env: usize,
}

impl ModelDims {
    pub fn rest(&self) -> usize {
        self.app * self.env
    }

    pub fn total(&self) -> usize {
        self.sys * self.app * self.env
    }
}

/// `(𝐇, T, I, a)` on `H_sys ⊗ H_app ⊗ H_env`, with `U_T = exp(i𝐇T)` cached.
#[derive(Debug, Clone)]
pub struct MeasurementModel {
    dims: ModelDims,
    hamiltonian: OperatorMatrix,
    evolution_time: f64,
    labels: Vec<String>,
    outcome_map: Arc<dyn OutcomeMap>,
    propagator: OperatorMatrix,
}

impl MeasurementModel {
    pub fn new(
        dims: ModelDims,
        hamiltonian: OperatorMatrix,
        evolution_time: f64,
        labels: Vec<String>,
        outcome_map: Arc<dyn OutcomeMap>,
    ) -> Result<Self> {
        if dims.sys == 0 || dims.app == 0 || dims.env == 0 || hamiltonian.dim() != dims.total() {
            return Err(BornError::InvalidModel(format!(
                "hamiltonian dimension {} does not match {}x{}x{}",
                hamiltonian.dim(),
                dims.sys,
                dims.app,
                dims.env
            )));
        }
        if labels.is_empty() {
            return Err(BornError::InvalidModel("outcome label set is empty".into()));
        }
        if !evolution_time.is_finite() {
            return Err(BornError::InvalidModel("evolution time must be finite".into()));
        }
        let defect = hamiltonian.hermiticity_defect();
        if defect > tolerances::HERMITIAN {
            return Err(BornError::InvalidModel(format!("hamiltonian is not Hermitian ({defect:e})")));
        }
        let generator = hamiltonian.scale(Complex64::new(0.0, evolution_time));
        let propagator = matrix_exponential(&generator)?;
        let defect = propagator.unitarity_defect();
        if defect > tolerances::MODEL_SYMMETRY {
            return Err(BornError::InvalidModel(format!("propagator is not unitary ({defect:e})")));
        }
        Ok(Self {
            dims,
            hamiltonian,
            evolution_time,
            labels,
            outcome_map,
            propagator,
        })
    }

    pub fn dims(&self) -> ModelDims {
        self.dims
    }

    pub fn hamiltonian(&self) -> &OperatorMatrix {
        &self.hamiltonian
    }

    pub fn evolution_time(&self) -> f64 {
        self.evolution_time
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn propagator(&self) -> &OperatorMatrix {
        &self.propagator
    }

    pub fn outcome_map(&self) -> &dyn OutcomeMap {
        self.outcome_map.as_ref()
    }

    pub fn classify(&self, state: &StateVector) -> Option<usize> {
        self.outcome_map.classify(state.amplitudes())
    }

    /// `U_T (ψ ⊗ χ)`.
    pub fn evolve(&self, psi: &StateVector, chi: &StateVector) -> Result<StateVector> {
        self.check_sys(psi)?;
        self.check_rest(chi)?;
        let joint = psi.tensor(chi);
        Ok(self.propagator.apply(&joint)?)
    }

    /// `a(U_T (ψ ⊗ χ))`.
    pub fn outcome(&self, psi: &StateVector, chi: &StateVector) -> Result<Option<usize>> {
        Ok(self.classify(&self.evolve(psi, chi)?))
    }

    /// `U_T (|k⟩ ⊗ χ)` from the `k`-th column block of `U_T`.
    pub(crate) fn branch(&self, k: usize, chi: &[Complex64]) -> Vec<Complex64> {
        let dim = self.dims.total();
        let rest = self.dims.rest();
        let u = self.propagator.entries();
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for (c, &x) in chi.iter().enumerate() {
            if x == Complex64::new(0.0, 0.0) {
                continue;
            }
            let col = k * rest + c;
            for (r, o) in out.iter_mut().enumerate() {
                *o += u[r * dim + col] * x;
            }
        }
        out
    }

    pub(crate) fn check_sys(&self, psi: &StateVector) -> Result<()> {
        if psi.len() != self.dims.sys {
            return Err(BornError::Dimension {
                what: "system state",
                expected: self.dims.sys,
                found: psi.len(),
            });
        }
        let n = psi.norm_sqr();
        if (n - 1.0).abs() > tolerances::PROBABILITY_SUM {
            return Err(BornError::NotNormalized(n));
        }
        Ok(())
    }

    pub(crate) fn check_rest(&self, chi: &StateVector) -> Result<()> {
        if chi.len() != self.dims.rest() {
            return Err(BornError::Dimension {
                what: "apparatus/environment state",
                expected: self.dims.rest(),
                found: chi.len(),
            });
        }
        Ok(())
    }
}
