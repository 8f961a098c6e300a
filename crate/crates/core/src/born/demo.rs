//! The built-in tipping model.
//!
//! Sites are ordered system, chain sites `1..=N`, environment qubit; the
//! system and every chain site are `n`-level qudits and site 0 is the most
//! significant digit of the basis index. With `X_ij = 2·SWAP_ij − 1` (equal
//! to `σ⃗_i·σ⃗_j` for qubits):
//!
//! ```text
//! H = −J X_01 − Σ_bonds X_{l,l+1} + ε Z_env ⊗ Σ_bonds g_l X_{l,l+1},   g_l = (l − N/2)/N
//! ```
//!
//! The probe bond copies the system label into the ferromagnetic chain and
//! the environment qubit tilts the chain one way or the other. `H` only
//! moves labels between sites, so it conserves every label's occupation and
//! commutes with `u^{⊗(N+1)} ⊗ 1` for every label permutation and diagonal
//! phase `u`. Ensemble members are label-balanced chain superpositions times
//! an environment state, and the ensemble is the union of their orbits under
//! all label permutations.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::{
    check_p1, check_p2, verify_symmetry_rule, BornError, BranchTable, DeclaredSymmetry, Ensemble, MeasurementModel,
    ModelDims, OutcomeSymmetry, PropertyReport, Result, SectorArgmax, SymmetryRuleReport,
};
use crate::harness::{OutcomeCounts, RngStream};
use crate::numeric::{OperatorMatrix, Spectrum, StateVector, MAX_DIMENSION};
use crate::spinchain::{Boundary, ChainSpec};
use crate::tolerances;

const LABEL_NAMES: [&str; 4] = ["a", "b", "c", "d"];
/// Candidate seeds used to pick the evolution time.
const TIME_POOL: u64 = 8;
/// Required lead of the equal-amplitude response, in units of the resolution.
const READY_MARGIN: f64 = 100.0;
/// Stream offset for generated test states, disjoint from seed candidates.
const TEST_STREAM: u64 = 1 << 40;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct DemoSpec {
    pub n_labels: usize,
    pub chain: ChainSpec,
    pub ens_size: usize,
    pub seed: u64,
    /// `J` of the probe bond.
    pub probe_coupling: f64,
    /// `ε` of the environment tilt.
    pub tilt: f64,
    /// Minimum lead of the winning sector for a state to be classified.
    pub resolution: f64,
    /// Mean basis-state sector lead that fixes `T`.
    pub gap_threshold: f64,
    pub time_step: f64,
    pub max_time: f64,
}

impl DemoSpec {
    pub fn new(n_labels: usize, chain: ChainSpec, ens_size: usize, seed: u64) -> Self {
        Self {
            n_labels,
            chain,
            ens_size,
            seed,
            probe_coupling: 1.0,
            tilt: 0.5,
            resolution: 1e-6,
            gap_threshold: 0.1,
            time_step: 0.05,
            max_time: 10.0,
        }
    }

    /// The shipped configurations: `(n, N, |E|)` = (2, 4, 64), (3, 3, 36), (4, 4, 48).
    pub fn shipped(n_labels: usize, seed: u64) -> Result<Self> {
        let (sites, ens) = match n_labels {
            2 => (4, 64),
            3 => (3, 36),
            4 => (4, 48),
            other => return Err(BornError::InvalidDemo(format!("no shipped model for {other} labels"))),
        };
        let chain = ChainSpec::ferromagnetic(sites, Boundary::Open).map_err(|e| BornError::InvalidDemo(e.to_string()))?;
        Ok(Self::new(n_labels, chain, ens, seed))
    }

    pub fn orbit_size(&self) -> usize {
        (1..=self.n_labels).product()
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_labels;
        let sites = self.chain.n_sites();
        let bad = |msg: String| Err(BornError::InvalidDemo(msg));
        if !(2..=LABEL_NAMES.len()).contains(&n) {
            return bad(format!("n_labels must be between 2 and 4 (got {n})"));
        }
        if !self.chain.is_ferromagnetic() {
            return bad("the tipping model needs a ferromagnetic chain (coupling sign -1)".into());
        }
        if !sites.is_multiple_of(n) {
            return bad(format!("chain length {sites} must be divisible by n_labels {n}"));
        }
        let dim = (n as u64).checked_pow(sites as u32 + 1).map(|d| d * 2);
        if dim.is_none_or(|d| d > MAX_DIMENSION as u64) {
            return bad(format!("{n}^{} x 2 exceeds the dense dimension limit", sites + 1));
        }
        if self.ens_size == 0 || !self.ens_size.is_multiple_of(self.orbit_size()) {
            return bad(format!(
                "ensemble size {} must be a positive multiple of the orbit size {}",
                self.ens_size,
                self.orbit_size()
            ));
        }
        let finite = [self.probe_coupling, self.tilt, self.resolution, self.gap_threshold, self.time_step, self.max_time];
        if finite.iter().any(|x| !x.is_finite()) || self.time_step <= 0.0 || self.max_time < self.time_step || self.resolution < 0.0 {
            return bad("model parameters must be finite with positive time step".into());
        }
        Ok(())
    }
}

/// Base-`n` site layout shared by the Hamiltonian and the ensemble.
#[derive(Debug, Clone, Copy)]
struct Layout {
    n: usize,
    sites: usize,
}

impl Layout {
    fn chain_dim(&self) -> usize {
        self.n.pow(self.sites as u32)
    }

    fn qudit_dim(&self) -> usize {
        self.n * self.chain_dim()
    }

    fn total_dim(&self) -> usize {
        2 * self.qudit_dim()
    }

    /// Digits of a qudit index, site 0 first.
    fn digits(&self, mut q: usize, count: usize) -> Vec<usize> {
        let mut d = vec![0; count];
        for slot in d.iter_mut().rev() {
            *slot = q % self.n;
            q /= self.n;
        }
        d
    }

    fn index(&self, digits: &[usize]) -> usize {
        digits.iter().fold(0, |acc, &d| acc * self.n + d)
    }

    /// Chain configurations in which every label appears `N/n` times.
    fn balanced_configs(&self) -> Vec<usize> {
        let per = self.sites / self.n;
        (0..self.chain_dim())
            .filter(|&c| {
                let d = self.digits(c, self.sites);
                (0..self.n).all(|j| d.iter().filter(|&&x| x == j).count() == per)
            })
            .collect()
    }

    /// Basis map of `P_σ^{⊗N} ⊗ 1_env` on the rest space.
    fn rest_permutation(&self, perm: &[usize]) -> Vec<usize> {
        (0..self.chain_dim() * 2)
            .map(|idx| {
                let (chain, env) = (idx / 2, idx % 2);
                let d: Vec<usize> = self.digits(chain, self.sites).into_iter().map(|x| perm[x]).collect();
                self.index(&d) * 2 + env
            })
            .collect()
    }
}

fn build_hamiltonian(spec: &DemoSpec, layout: Layout) -> Result<OperatorMatrix> {
    let n_sites = layout.sites;
    let sign = spec.chain.coupling_sign() as f64;
    // (i, j, base coefficient, tilt weight g)
    let mut bonds: Vec<(usize, usize, f64, f64)> = vec![(0, 1, -spec.probe_coupling, 0.0)];
    let half = n_sites as f64 / 2.0;
    for l in 1..n_sites {
        bonds.push((l, l + 1, sign, (l as f64 - half) / n_sites as f64));
    }
    if spec.chain.boundary() == Boundary::Periodic && n_sites > 2 {
        bonds.push((n_sites, 1, sign, (n_sites as f64 - half) / n_sites as f64));
    }
    let dim = layout.total_dim();
    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    for q in 0..layout.qudit_dim() {
        let d = layout.digits(q, n_sites + 1);
        for &(i, j, base, g) in &bonds {
            let mut swapped = d.clone();
            swapped.swap(i, j);
            let q2 = layout.index(&swapped);
            for env in 0..2 {
                let z = if env == 0 { 1.0 } else { -1.0 };
                let c = base + spec.tilt * z * g;
                let (col, row) = (q * 2 + env, q2 * 2 + env);
                entries[col * dim + col] -= c;
                entries[row * dim + col] += 2.0 * c;
            }
        }
    }
    Ok(OperatorMatrix::new(dim, entries)?.mark_hermitian()?)
}

fn occupation_table(layout: Layout) -> Vec<u8> {
    let n = layout.n;
    let mut occ = vec![0u8; layout.total_dim() * n];
    for q in 0..layout.qudit_dim() {
        let d = layout.digits(q, layout.sites + 1);
        for env in 0..2 {
            let b = q * 2 + env;
            for &x in &d[1..] {
                occ[b * n + x] += 1;
            }
        }
    }
    occ
}

fn candidate_seed(layout: Layout, configs: &[usize], seed: u64, index: u64) -> Result<StateVector> {
    let mut rng = RngStream::new(seed, index);
    let mut chain = vec![Complex64::new(0.0, 0.0); layout.chain_dim()];
    for &c in configs {
        chain[c] = Complex64::new(rng.standard_normal(), rng.standard_normal());
    }
    let env = [
        Complex64::new(rng.standard_normal(), rng.standard_normal()),
        Complex64::new(rng.standard_normal(), rng.standard_normal()),
    ];
    let amps: Vec<Complex64> = chain.iter().flat_map(|c| env.iter().map(move |e| c * e)).collect();
    Ok(StateVector::new(amps, vec![layout.chain_dim(), 2])?.normalized()?)
}

/// All permutations of `0..n` in lexicographic order.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| p[i] < p[i + 1]) else {
            return out;
        };
        let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).expect("successor exists");
        p.swap(i, j);
        p[i + 1..].reverse();
    }
}

fn permute_state(map: &[usize], chi: &StateVector) -> Result<StateVector> {
    let mut out = vec![Complex64::new(0.0, 0.0); chi.len()];
    for (idx, &a) in chi.amplitudes().iter().enumerate() {
        out[map[idx]] = a;
    }
    Ok(StateVector::new(out, chi.dims().to_vec())?)
}

/// Sector weights of `U_T(|k⟩ ⊗ χ)` for each `k`: column `k` of the
/// response matrix.
fn response(weights: impl Fn(usize) -> Vec<f64>, n: usize) -> Vec<Vec<f64>> {
    (0..n).map(weights).collect()
}

/// Lead of the diagonal entry over the rest of its column, per column.
fn basis_gaps(columns: &[Vec<f64>]) -> Vec<f64> {
    columns
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let other = w
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &x)| x)
                .fold(f64::NEG_INFINITY, f64::max);
            w[k] - other
        })
        .collect()
}

fn uniform_lead(columns: &[Vec<f64>]) -> f64 {
    let n = columns.len();
    let r: Vec<f64> = (0..n).map(|j| columns.iter().map(|c| c[j]).sum::<f64>() / n as f64).collect();
    super::model::leader_of(&r).1
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct DemoDiagnostics {
    pub evolution_time: f64,
    /// Mean basis-state sector lead at the chosen time over the time pool.
    pub mean_basis_gap: f64,
    /// Smallest basis-state lead over the accepted seeds.
    pub min_basis_gap: f64,
    /// Smallest equal-amplitude lead over the accepted seeds.
    pub min_equal_amplitude_gap: f64,
    pub seeds_tried: u64,
    /// Candidate stream indices whose orbits form the ensemble.
    pub seeds_used: Vec<u64>,
    /// `max |[Ũ, H]|` for each declared symmetry.
    pub symmetry_commutators: Vec<(String, f64)>,
}

#[derive(Debug, Clone)]
pub struct DemoModel {
    spec: DemoSpec,
    layout: Layout,
    model: MeasurementModel,
    ensemble: Ensemble,
    table: BranchTable,
    diagnostics: DemoDiagnostics,
}

/// Builds the tipping model and its symmetric ensemble.
pub fn demo_model(spec: &DemoSpec) -> Result<DemoModel> {
    spec.validate()?;
    let n = spec.n_labels;
    let layout = Layout {
        n,
        sites: spec.chain.n_sites(),
    };
    let hamiltonian = build_hamiltonian(spec, layout)?;
    let map = SectorArgmax::new(n, layout.sites, occupation_table(layout), spec.resolution)?;
    let configs = layout.balanced_configs();
    let dim = layout.total_dim();
    let joint = |k: usize, chi: &StateVector| -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        let rest = chi.len();
        v[k * rest..(k + 1) * rest].copy_from_slice(chi.amplitudes());
        v
    };

    // evolution time: first grid point where the pool's mean basis lead clears the threshold
    let spectrum = Spectrum::of(&hamiltonian)?;
    let pool: Vec<StateVector> = (0..TIME_POOL)
        .map(|c| candidate_seed(layout, &configs, spec.seed, c))
        .collect::<Result<_>>()?;
    let steps = (spec.max_time / spec.time_step).floor() as usize;
    let mut chosen = None;
    for step in 1..=steps {
        let t = step as f64 * spec.time_step;
        let mut total = 0.0;
        for chi in &pool {
            let cols = response(
                |k| map.weights(&spectrum.apply_function(&joint(k, chi), |l| Complex64::from_polar(1.0, l * t))),
                n,
            );
            total += basis_gaps(&cols).iter().sum::<f64>();
        }
        let mean = total / (pool.len() * n) as f64;
        if mean > spec.gap_threshold {
            chosen = Some((t, mean));
            break;
        }
    }
    let Some((evolution_time, mean_basis_gap)) = chosen else {
        return Err(BornError::InvalidDemo(format!(
            "no evolution time up to {} reaches a mean sector lead of {}",
            spec.max_time, spec.gap_threshold
        )));
    };

    let labels = LABEL_NAMES[..n].iter().map(|s| s.to_string()).collect();
    let dims = ModelDims {
        sys: n,
        app: layout.chain_dim(),
        env: 2,
    };
    let model = MeasurementModel::new(dims, hamiltonian, evolution_time, labels, Arc::new(map.clone()))?;

    // seeds: every basis input must read its own label and the uniform superposition must be decisive
    let perms = permutations(n);
    let maps: Vec<Vec<usize>> = perms.iter().map(|p| layout.rest_permutation(p)).collect();
    let needed = spec.ens_size / perms.len();
    let max_candidates = TIME_POOL + 64 * needed as u64;
    let mut seeds_used = Vec::with_capacity(needed);
    let mut members = Vec::with_capacity(spec.ens_size);
    let (mut min_basis_gap, mut min_equal_amplitude_gap) = (f64::INFINITY, f64::INFINITY);
    let mut tried = 0;
    while seeds_used.len() < needed && tried < max_candidates {
        let c = tried;
        tried += 1;
        let chi = candidate_seed(layout, &configs, spec.seed, c)?;
        let cols = response(|k| map.weights(&model.branch(k, chi.amplitudes())), n);
        let gaps = basis_gaps(&cols);
        let basis_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
        let equal_gap = uniform_lead(&cols);
        if basis_gap < spec.resolution || equal_gap < READY_MARGIN * spec.resolution {
            continue;
        }
        let orbit: Vec<StateVector> = maps.iter().map(|m| permute_state(m, &chi)).collect::<Result<_>>()?;
        let distinct = orbit.iter().enumerate().all(|(i, a)| {
            orbit[..i]
                .iter()
                .all(|b| a.max_distance(b).is_ok_and(|d| d > tolerances::ENSEMBLE_CLOSURE))
        });
        if !distinct {
            continue;
        }
        min_basis_gap = min_basis_gap.min(basis_gap);
        min_equal_amplitude_gap = min_equal_amplitude_gap.min(equal_gap);
        seeds_used.push(c);
        members.extend(orbit);
    }
    if seeds_used.len() < needed {
        return Err(BornError::InvalidDemo(format!(
            "only {} of {needed} seed states are decisive after {tried} candidates",
            seeds_used.len()
        )));
    }

    let layout_syms = DemoSymmetries { spec, layout };
    let mut declared_ops = vec![layout_syms.phase(1.0), layout_syms.permutation(&transposition(n))?];
    if n > 2 {
        declared_ops.push(layout_syms.permutation(&cycle(n))?);
    }
    let declared = declared_ops
        .iter()
        .map(|s| DeclaredSymmetry {
            name: s.name.clone(),
            u_rest: s.u_rest.clone(),
        })
        .collect();
    let ensemble = Ensemble::new(members, declared, spec.seed)?;
    let mut symmetry_commutators = Vec::new();
    for s in &declared_ops {
        let (v, _) = s.validate(&model, &ensemble)?;
        if !v.pass {
            return Err(BornError::InvalidDemo(format!(
                "declared symmetry {} fails validation (commutator {:e})",
                s.name, v.commutator_norm
            )));
        }
        symmetry_commutators.push((s.name.clone(), v.commutator_norm));
    }
    let table = BranchTable::new(&model, &ensemble)?;
    Ok(DemoModel {
        spec: spec.clone(),
        layout,
        model,
        ensemble,
        table,
        diagnostics: DemoDiagnostics {
            evolution_time,
            mean_basis_gap,
            min_basis_gap,
            min_equal_amplitude_gap,
            seeds_tried: tried,
            seeds_used,
            symmetry_commutators,
        },
    })
}

fn transposition(n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.swap(0, 1);
    p
}

fn cycle(n: usize) -> Vec<usize> {
    (0..n).map(|i| (i + 1) % n).collect()
}

struct DemoSymmetries<'a> {
    spec: &'a DemoSpec,
    layout: Layout,
}

impl DemoSymmetries<'_> {
    /// `U_φ = diag(e^{iφ}, e^{−iφ}, 1, …)` on the system, `U_φ^{⊗N} ⊗ 1` on the rest.
    fn phase(&self, phi: f64) -> OutcomeSymmetry {
        let n = self.spec.n_labels;
        let level = |j: usize| match j {
            0 => 1.0,
            1 => -1.0,
            _ => 0.0,
        };
        let sys: Vec<Complex64> = (0..n).map(|j| Complex64::from_polar(1.0, phi * level(j))).collect();
        let rest: Vec<Complex64> = (0..self.layout.chain_dim() * 2)
            .map(|idx| {
                let d = self.layout.digits(idx / 2, self.layout.sites);
                let net: f64 = d.iter().map(|&x| level(x)).sum();
                Complex64::from_polar(1.0, phi * net)
            })
            .collect();
        OutcomeSymmetry {
            name: format!("phase(phi={phi})"),
            u_sys: OperatorMatrix::from_diagonal(&sys),
            u_rest: OperatorMatrix::from_diagonal(&rest),
            iota: (0..n).collect(),
        }
    }

    /// Label permutation `σ` applied on every site; `ι = σ`.
    fn permutation(&self, perm: &[usize]) -> Result<OutcomeSymmetry> {
        let n = self.spec.n_labels;
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&j| j >= n || std::mem::replace(&mut seen[j], true)) {
            return Err(BornError::InvalidSymmetry(format!("{perm:?} is not a permutation of {n} labels")));
        }
        let name = format!(
            "permutation({})",
            perm.iter().map(|&j| LABEL_NAMES[j]).collect::<Vec<_>>().join("")
        );
        Ok(OutcomeSymmetry {
            name,
            u_sys: OperatorMatrix::permutation(perm)?,
            u_rest: OperatorMatrix::permutation(&self.layout.rest_permutation(perm))?,
            iota: perm.to_vec(),
        })
    }
}

impl DemoModel {
    pub fn spec(&self) -> &DemoSpec {
        &self.spec
    }

    pub fn model(&self) -> &MeasurementModel {
        &self.model
    }

    pub fn ensemble(&self) -> &Ensemble {
        &self.ensemble
    }

    pub fn diagnostics(&self) -> &DemoDiagnostics {
        &self.diagnostics
    }

    pub fn n_labels(&self) -> usize {
        self.spec.n_labels
    }

    fn symmetries(&self) -> DemoSymmetries<'_> {
        DemoSymmetries {
            spec: &self.spec,
            layout: self.layout,
        }
    }

    /// P1 symmetry: `U_φ` on levels 0 and 1, `ι = id`.
    pub fn phase_symmetry(&self, phi: f64) -> OutcomeSymmetry {
        self.symmetries().phase(phi)
    }

    pub fn permutation_symmetry(&self, perm: &[usize]) -> Result<OutcomeSymmetry> {
        self.symmetries().permutation(perm)
    }

    /// P2 symmetry: exchange of labels 0 and 1 (`U_π = σ_x` for two labels).
    pub fn flip_symmetry(&self) -> OutcomeSymmetry {
        self.permutation_symmetry(&transposition(self.spec.n_labels))
            .expect("transposition is a permutation")
    }

    /// Symmetries checked by default: a generic phase, the exchange of
    /// labels 0 and 1 and, for more than two labels, the cyclic shift.
    pub fn standard_symmetries(&self) -> Vec<OutcomeSymmetry> {
        let n = self.spec.n_labels;
        let mut out = vec![self.phase_symmetry(0.7), self.flip_symmetry()];
        if n > 2 {
            out.push(self.permutation_symmetry(&cycle(n)).expect("cycle is a permutation"));
        }
        out
    }

    pub fn counts(&self, psi: &StateVector) -> Result<OutcomeCounts> {
        self.table.counts(&self.model, psi, self.spec.seed)
    }

    pub fn outcomes(&self, psi: &StateVector) -> Result<Vec<Option<usize>>> {
        self.table.outcomes(&self.model, psi)
    }

    /// `Σ_k e^{iθ_k}|k⟩/√n`; all phases zero when `phases` is `None`.
    pub fn equal_amplitude_state(&self, phases: Option<&[f64]>) -> Result<StateVector> {
        let n = self.spec.n_labels;
        let r = 1.0 / (n as f64).sqrt();
        let amps = (0..n)
            .map(|k| Complex64::from_polar(r, phases.and_then(|p| p.get(k)).copied().unwrap_or(0.0)))
            .collect();
        Ok(StateVector::from_amplitudes(amps)?)
    }

    /// Basis states, equal-amplitude states with random phases, then random
    /// states, `count` in total (at least the basis states).
    pub fn test_states(&self, count: usize) -> Result<Vec<StateVector>> {
        let n = self.spec.n_labels;
        let mut out: Vec<StateVector> = (0..n).map(|k| StateVector::basis(n, k)).collect::<std::result::Result<_, _>>()?;
        out.push(self.equal_amplitude_state(None)?);
        let mut i = 0u64;
        while out.len() < count {
            let mut rng = RngStream::new(self.spec.seed, TEST_STREAM + i);
            let state = if i.is_multiple_of(3) {
                let phases: Vec<f64> = (0..n).map(|_| std::f64::consts::TAU * rng.uniform()).collect();
                self.equal_amplitude_state(Some(&phases))?
            } else {
                let amps = (0..n)
                    .map(|_| Complex64::new(rng.standard_normal(), rng.standard_normal()))
                    .collect();
                StateVector::from_amplitudes(amps)?.normalized()?
            };
            out.push(state);
            i += 1;
        }
        Ok(out)
    }

    pub fn verify_symmetry_rule(&self, sym: &OutcomeSymmetry, tests: &[StateVector]) -> Result<SymmetryRuleReport> {
        verify_symmetry_rule(&self.model, &self.ensemble, sym, tests)
    }

    pub fn check_p1(&self, psi: &StateVector, phis: &[f64]) -> Result<PropertyReport> {
        check_p1(&self.model, &self.ensemble, psi, phis, |phi| Ok(self.phase_symmetry(phi)))
    }

    pub fn check_p2(&self, psi: &StateVector) -> Result<PropertyReport> {
        check_p2(&self.model, &self.ensemble, psi, &self.flip_symmetry())
    }
}
