use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{BornError, Ensemble, MeasurementModel, Result};
use crate::harness::OutcomeCounts;
use crate::numeric::{tensor_product, OperatorMatrix, StateVector};
use crate::tolerances;

/// `U_T(|k⟩ ⊗ χ)` for every system basis state `k` and member `χ`.
///
/// By linearity `U_T(ψ ⊗ χ) = Σ_k ψ_k U_T(|k⟩ ⊗ χ)`, so any number of test
/// states can be counted against the ensemble at `O(n · dim)` per member.
#[derive(Debug, Clone)]
pub struct BranchTable {
    n_sys: usize,
    dim: usize,
    /// `branches[member][k * dim + r]`.
    branches: Vec<Vec<Complex64>>,
}

impl BranchTable {
    pub fn new(model: &MeasurementModel, ens: &Ensemble) -> Result<Self> {
        let dims = model.dims();
        if ens.rest_dim() != dims.rest() {
            return Err(BornError::Dimension {
                what: "ensemble member",
                expected: dims.rest(),
                found: ens.rest_dim(),
            });
        }
        let branches = ens
            .members()
            .par_iter()
            .map(|chi| {
                (0..dims.sys)
                    .flat_map(|k| model.branch(k, chi.amplitudes()))
                    .collect::<Vec<_>>()
            })
            .collect();
        Ok(Self {
            n_sys: dims.sys,
            dim: dims.total(),
            branches,
        })
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    /// `U_T(ψ ⊗ χ_member)`.
    pub fn evolved(&self, member: usize, psi: &[Complex64]) -> Vec<Complex64> {
        let b = &self.branches[member];
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for (k, &a) in psi.iter().enumerate().take(self.n_sys) {
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (o, x) in out.iter_mut().zip(&b[k * self.dim..(k + 1) * self.dim]) {
                *o += a * x;
            }
        }
        out
    }

    /// `a(U_T(ψ ⊗ χ))` for every member, in ensemble order.
    pub fn outcomes(&self, model: &MeasurementModel, psi: &StateVector) -> Result<Vec<Option<usize>>> {
        model.check_sys(psi)?;
        let map = model.outcome_map();
        Ok((0..self.len())
            .into_par_iter()
            .map(|m| map.classify(&self.evolved(m, psi.amplitudes())))
            .collect())
    }

    pub fn counts(&self, model: &MeasurementModel, psi: &StateVector, seed: u64) -> Result<OutcomeCounts> {
        let outcomes = self.outcomes(model, psi)?;
        Ok(tally(model, &outcomes, seed))
    }
}

fn tally(model: &MeasurementModel, outcomes: &[Option<usize>], seed: u64) -> OutcomeCounts {
    let mut counts = OutcomeCounts::new(model.labels().to_vec(), seed);
    for &o in outcomes {
        counts.record(o);
    }
    counts
}

/// `count_i = #{χ ∈ E : a(U_T(ψ ⊗ χ)) = i}`.
pub fn outcome_counts(model: &MeasurementModel, psi: &StateVector, ens: &Ensemble) -> Result<OutcomeCounts> {
    BranchTable::new(model, ens)?.counts(model, psi, ens.seed())
}

/// `Ũ = u_sys ⊗ u_rest` together with the label permutation `ι` it induces.
#[derive(Debug, Clone)]
pub struct OutcomeSymmetry {
    pub name: String,
    pub u_sys: OperatorMatrix,
    pub u_rest: OperatorMatrix,
    pub iota: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SymmetryValidation {
    pub commutator_norm: f64,
    pub closure_is_permutation: bool,
    pub pass: bool,
}

impl OutcomeSymmetry {
    pub fn is_identity_relabeling(&self) -> bool {
        self.iota.iter().enumerate().all(|(i, &j)| i == j)
    }

    fn check_shape(&self, model: &MeasurementModel) -> Result<()> {
        let dims = model.dims();
        if self.u_sys.dim() != dims.sys || self.u_rest.dim() != dims.rest() {
            return Err(BornError::InvalidSymmetry(format!(
                "{}: operator dimensions {}x{} do not match the model",
                self.name,
                self.u_sys.dim(),
                self.u_rest.dim()
            )));
        }
        let n = model.n_labels();
        let mut seen = vec![false; n];
        if self.iota.len() != n || self.iota.iter().any(|&j| j >= n || std::mem::replace(&mut seen[j], true)) {
            return Err(BornError::InvalidSymmetry(format!("{}: iota is not a permutation of the labels", self.name)));
        }
        Ok(())
    }

    /// `[Ũ, 𝐇]` on the dense total space and closure of `E` under `u_rest`.
    pub fn validate(&self, model: &MeasurementModel, ens: &Ensemble) -> Result<(SymmetryValidation, Vec<usize>)> {
        self.check_shape(model)?;
        let full = tensor_product(&self.u_sys, &self.u_rest)?;
        let commutator_norm = full.commutator(model.hamiltonian())?.max_abs();
        let closure = ens.closure(&self.name, &self.u_rest)?;
        let pass = commutator_norm <= tolerances::MODEL_SYMMETRY && closure.is_permutation;
        Ok((
            SymmetryValidation {
                commutator_norm,
                closure_is_permutation: closure.is_permutation,
                pass,
            },
            closure.images,
        ))
    }

    /// `(u_sys ⊗ u_rest) x` without forming the product.
    pub fn apply_total(&self, x: &[Complex64]) -> Vec<Complex64> {
        let (n, r) = (self.u_sys.dim(), self.u_rest.dim());
        let mut tmp = vec![Complex64::new(0.0, 0.0); n * r];
        // rows of x are system indices: first act with u_rest on each row
        for s in 0..n {
            let row = &x[s * r..(s + 1) * r];
            for (i, t) in tmp[s * r..(s + 1) * r].iter_mut().enumerate() {
                *t = self.u_rest.row(i).iter().zip(row).map(|(a, b)| a * b).sum();
            }
        }
        let mut out = vec![Complex64::new(0.0, 0.0); n * r];
        for s in 0..n {
            for t in 0..n {
                let u = self.u_sys.get(s, t);
                if u == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..r {
                    out[s * r + c] += u * tmp[t * r + c];
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Violation {
    pub test: usize,
    /// Witnessing member `χ`.
    pub member: usize,
    /// Member `Vχ` it is paired with.
    pub image_member: usize,
    pub outcome: Option<usize>,
    pub image_outcome: Option<usize>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RuleRow {
    pub test: usize,
    pub counts: Vec<u64>,
    pub unresolved: u64,
    pub image_counts: Vec<u64>,
    pub image_unresolved: u64,
    /// `count_i(ψ) = count_{ι(i)}(u_sys ψ)` for every label.
    pub counts_match: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SymmetryRuleReport {
    pub symmetry: String,
    pub iota: Vec<usize>,
    pub validation: SymmetryValidation,
    pub rows: Vec<RuleRow>,
    pub violations: Vec<Violation>,
    /// Classified evolved states `x` for which `a(Ũx) ≠ ι(a(x))`.
    pub diagram_failures: usize,
    pub pass: bool,
}

/// Checks `p_i(ψ) = p_{ι(i)}(u_sys ψ)` by exact counting over `E`.
///
/// Each member `χ` is paired with `Vχ = u_rest χ`; a disagreement between
/// `a(U_T(ψ⊗χ))` mapped through `ι` and `a(U_T(u_sys ψ ⊗ Vχ))` is reported
/// with the witnessing member.
pub fn verify_symmetry_rule(
    model: &MeasurementModel,
    ens: &Ensemble,
    sym: &OutcomeSymmetry,
    test_states: &[StateVector],
) -> Result<SymmetryRuleReport> {
    let (validation, images) = sym.validate(model, ens)?;
    let table = BranchTable::new(model, ens)?;
    let map = model.outcome_map();
    let mut rows = Vec::with_capacity(test_states.len());
    let mut violations = Vec::new();
    let mut diagram_failures = 0;
    for (t, psi) in test_states.iter().enumerate() {
        let image_psi = sym.u_sys.apply(psi)?;
        let outcomes = table.outcomes(model, psi)?;
        let image_outcomes = table.outcomes(model, &image_psi)?;
        for (m, &o) in outcomes.iter().enumerate() {
            let expected = o.map(|i| sym.iota[i]);
            let got = image_outcomes[images[m]];
            if got != expected {
                violations.push(Violation {
                    test: t,
                    member: m,
                    image_member: images[m],
                    outcome: o,
                    image_outcome: got,
                });
            }
        }
        diagram_failures += (0..table.len())
            .into_par_iter()
            .filter(|&m| {
                let x = table.evolved(m, psi.amplitudes());
                match map.classify(&x) {
                    Some(i) => map.classify(&sym.apply_total(&x)) != Some(sym.iota[i]),
                    None => false,
                }
            })
            .count();
        let counts = tally(model, &outcomes, ens.seed());
        let image = tally(model, &image_outcomes, ens.seed());
        let counts_match = (0..model.n_labels()).all(|i| counts.count(i) == image.count(sym.iota[i]))
            && counts.unresolved() == image.unresolved();
        rows.push(RuleRow {
            test: t,
            counts: counts.counts().to_vec(),
            unresolved: counts.unresolved(),
            image_counts: image.counts().to_vec(),
            image_unresolved: image.unresolved(),
            counts_match,
        });
    }
    let pass = validation.pass && violations.is_empty() && diagram_failures == 0 && rows.iter().all(|r| r.counts_match);
    Ok(SymmetryRuleReport {
        symmetry: sym.name.clone(),
        iota: sym.iota.clone(),
        validation,
        rows,
        violations,
        diagram_failures,
        pass,
    })
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct PropertyRow {
    pub phi: Option<f64>,
    pub counts: Vec<u64>,
    pub transformed_counts: Vec<u64>,
    pub unresolved: (u64, u64),
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct PropertyReport {
    pub property: &'static str,
    pub rows: Vec<PropertyRow>,
    pub pass: bool,
}

/// P1: `p_i(ψ) = p_i(U_φ ψ)` for each `φ`. `extension(φ)` supplies the
/// declared symmetry whose system part is `U_φ`.
pub fn check_p1(
    model: &MeasurementModel,
    ens: &Ensemble,
    psi: &StateVector,
    phis: &[f64],
    extension: impl Fn(f64) -> Result<OutcomeSymmetry>,
) -> Result<PropertyReport> {
    let table = BranchTable::new(model, ens)?;
    let base = table.counts(model, psi, ens.seed())?;
    let mut rows = Vec::with_capacity(phis.len());
    for &phi in phis {
        let sym = extension(phi)?;
        if !sym.is_identity_relabeling() {
            return Err(BornError::InvalidSymmetry(format!("{}: P1 needs iota = id", sym.name)));
        }
        let (validation, _) = sym.validate(model, ens)?;
        let image = table.counts(model, &sym.u_sys.apply(psi)?, ens.seed())?;
        rows.push(PropertyRow {
            phi: Some(phi),
            counts: base.counts().to_vec(),
            transformed_counts: image.counts().to_vec(),
            unresolved: (base.unresolved(), image.unresolved()),
            pass: validation.pass && base.counts() == image.counts() && base.unresolved() == image.unresolved(),
        });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(PropertyReport {
        property: "P1",
        rows,
        pass,
    })
}

/// P2: `count_i(ψ) = count_{π(i)}(U_π ψ)`.
pub fn check_p2(model: &MeasurementModel, ens: &Ensemble, psi: &StateVector, flip: &OutcomeSymmetry) -> Result<PropertyReport> {
    let (validation, _) = flip.validate(model, ens)?;
    let table = BranchTable::new(model, ens)?;
    let base = table.counts(model, psi, ens.seed())?;
    let image = table.counts(model, &flip.u_sys.apply(psi)?, ens.seed())?;
    let matches = (0..model.n_labels()).all(|i| base.count(i) == image.count(flip.iota[i]))
        && base.unresolved() == image.unresolved();
    let row = PropertyRow {
        phi: None,
        counts: base.counts().to_vec(),
        transformed_counts: image.counts().to_vec(),
        unresolved: (base.unresolved(), image.unresolved()),
        pass: validation.pass && matches,
    };
    Ok(PropertyReport {
        property: "P2",
        pass: row.pass,
        rows: vec![row],
    })
}
