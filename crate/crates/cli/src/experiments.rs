//! One runner per experiment family. Each returns its result block and the
//! checks it evaluated.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use rdsim::born::{born_probability, demo_model, fine_grain, DemoSpec, FineGrained, ModelDims, PropertyReport, SymmetryRuleReport};
use rdsim::harness::{chi_square_gof, ChiSquareResult, HarnessError, OutcomeCounts, RngStream};
use rdsim::numeric::StateVector;
use rdsim::pendulum::{amplitudes, critical_velocity, outcome_probabilities, run_pendulum_trials, ClassificationMode, PendulumExperiment};
use rdsim::spinchain::{
    build_heisenberg, commutator_norm, global_unitary, ground_space, pauli_conjugation_check, sensitivity_scan, su2_rotation,
    u_phi, u_pi, Boundary, ChainSpec, PauliConjugationReport, SensitivityPoint,
};
use rdsim::tolerances;

use crate::config::{BornCheck, BornParams, PendulumParams, SpinChainParams};
use crate::report::Check;
use crate::CliError;

fn run_err(e: impl std::fmt::Display) -> CliError {
    CliError::Run(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountTable {
    pub labels: Vec<String>,
    pub counts: Vec<u64>,
    pub unresolved: u64,
    pub n_trials: u64,
}

impl From<&OutcomeCounts> for CountTable {
    fn from(c: &OutcomeCounts) -> Self {
        Self {
            labels: c.labels().to_vec(),
            counts: c.counts().to_vec(),
            unresolved: c.unresolved(),
            n_trials: c.n_trials(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PendulumResults {
    pub critical_velocity: f64,
    pub mode: ClassificationMode,
    pub p_l: f64,
    pub p_r: f64,
    pub q_l: f64,
    pub q_r: f64,
    pub counts: CountTable,
    pub p_hat_r: f64,
    pub interval_r: [f64; 2],
    pub confidence: f64,
    /// `(p̂_R − p_R) / σ` with the binomial σ of the resolved trials.
    pub z_r: f64,
    /// Absent when an expected cell count is below five.
    pub chi_square: Option<ChiSquareResult>,
}

pub fn run_pendulum(p: &PendulumParams, seed: u64, workers: usize) -> Result<(PendulumResults, Vec<Check>), CliError> {
    let (p_l, p_r) = outcome_probabilities(p.delta, &p.noise).map_err(run_err)?;
    let (q_l, q_r) = amplitudes(p_l, p_r).map_err(run_err)?;
    let exp = PendulumExperiment {
        delta_phi_dot_0: p.delta,
        noise: p.noise.clone(),
        t_max: p.t_max,
        dt: p.dt,
        integrator: p.integrator,
    };
    let counts = run_pendulum_trials(&exp, p.n_trials, seed, p.mode, workers).map_err(run_err)?;
    let (lo, hi) = counts.wilson(1, p.confidence).map_err(run_err)?;
    let p_hat = counts.proportion(1);
    let n = counts.resolved() as f64;
    let sigma = (p_r * (1.0 - p_r) / n).sqrt();
    let dev = (p_hat - p_r).abs();
    let z_r = if sigma > 0.0 { (p_hat - p_r) / sigma } else { 0.0 };
    let chi_square = match chi_square_gof(&counts, &[p_l, p_r], tolerances::FIVE_SIGMA_ALPHA) {
        Ok(r) => Some(r),
        Err(HarnessError::UnderSampled { .. }) | Err(HarnessError::NoTrials) => None,
        Err(e) => return Err(run_err(e)),
    };

    let mut checks = vec![
        Check::at_most(
            "amplitude_normalization",
            (q_l * q_l + q_r * q_r - 1.0).abs(),
            tolerances::NORMALIZATION,
            "|q_L² + q_R² − 1|",
        ),
        Check::at_most(
            "estimate_within_5_sigma",
            dev,
            tolerances::STAT_SIGMAS * sigma,
            format!("|p̂_R − p_R| against 5σ over {} resolved trials", counts.resolved()),
        ),
    ];
    if let Some(gof) = &chi_square {
        checks.push(Check::at_most(
            "chi_square_gof",
            gof.statistic,
            gof.critical_value,
            format!("{} dof at alpha {:e}", gof.dof, gof.alpha),
        ));
    }
    let results = PendulumResults {
        critical_velocity: critical_velocity(),
        mode: p.mode,
        p_l,
        p_r,
        q_l,
        q_r,
        counts: CountTable::from(&counts),
        p_hat_r: p_hat,
        interval_r: [lo, hi],
        confidence: p.confidence,
        z_r,
        chi_square,
    };
    Ok((results, checks))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseNorm {
    pub phi: f64,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Commutators {
    pub spin_flip: f64,
    pub phase: Vec<PhaseNorm>,
    pub su2_samples: usize,
    pub su2_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpinChainResults {
    pub dim: usize,
    pub bonds: Vec<(usize, usize)>,
    pub ground_energy: f64,
    pub ground_degeneracy: usize,
    pub commutators: Commutators,
    pub pauli_conjugation: PauliConjugationReport,
    /// Ferromagnetic chains only.
    pub sensitivity: Option<Vec<SensitivityPoint>>,
}

pub const CHECK_PHASES: [f64; 3] = [0.3, 1.1, PI];

/// Random SU(2) elements drawn from stream 0 of `seed`.
pub fn su2_samples(seed: u64, count: usize) -> Vec<[f64; 3]> {
    let mut rng = RngStream::new(seed, 0);
    (0..count)
        .map(|_| [rng.standard_normal(), rng.standard_normal(), rng.standard_normal()])
        .collect()
}

/// Largest `‖[H, u^{⊗N}]‖` over the given rotations.
pub fn max_su2_commutator(spec: &ChainSpec, samples: &[[f64; 3]]) -> Result<f64, CliError> {
    let h = build_heisenberg(spec).map_err(run_err)?;
    let mut worst: f64 = 0.0;
    for a in samples {
        let u = global_unitary(&su2_rotation(*a), spec.n_sites()).map_err(run_err)?;
        worst = worst.max(commutator_norm(&h, &u).map_err(run_err)?);
    }
    Ok(worst)
}

/// Largest `|m(h) + m(−h)|` over field pairs present in the scan.
pub fn odd_defect(scan: &[SensitivityPoint]) -> f64 {
    let mut worst: f64 = 0.0;
    for a in scan {
        for b in scan {
            if a.h > 0.0 && b.h == -a.h {
                if let (Some(x), Some(y)) = (a.order_parameter, b.order_parameter) {
                    worst = worst.max((x + y).abs());
                }
            }
        }
    }
    worst
}

pub fn run_spinchain(p: &SpinChainParams, seed: u64) -> Result<(SpinChainResults, Vec<Check>), CliError> {
    let spec = ChainSpec::new(p.n_sites, p.sign, p.boundary).map_err(run_err)?;
    let h = build_heisenberg(&spec).map_err(run_err)?;
    let gs = ground_space(&h, tolerances::DEGENERACY).map_err(run_err)?;
    let flip = global_unitary(&u_pi(), p.n_sites).map_err(run_err)?;
    let spin_flip = commutator_norm(&h, &flip).map_err(run_err)?;
    let phase = CHECK_PHASES
        .iter()
        .map(|&phi| {
            let u = global_unitary(&u_phi(phi), p.n_sites).map_err(run_err)?;
            Ok(PhaseNorm {
                phi,
                norm: commutator_norm(&h, &u).map_err(run_err)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let su2_max = max_su2_commutator(&spec, &su2_samples(seed, p.su2_samples))?;
    let pauli = pauli_conjugation_check().map_err(run_err)?;
    let sensitivity = if spec.is_ferromagnetic() {
        Some(sensitivity_scan(&spec, &p.fields).map_err(run_err)?)
    } else {
        None
    };

    let tol = tolerances::CHAIN_SYMMETRY;
    let phase_max = phase.iter().map(|x| x.norm).fold(0.0, f64::max);
    let mut checks = vec![
        Check::at_most("spin_flip_commutator", spin_flip, tol, "max |[H, U_π^⊗N]|"),
        Check::at_most("phase_commutator", phase_max, tol, "max |[H, U_φ^⊗N]| over the fixed phases"),
    ];
    if p.su2_samples > 0 {
        checks.push(Check::at_most(
            "su2_commutator",
            su2_max,
            tol,
            format!("max |[H, u^⊗N]| over {} random rotations", p.su2_samples),
        ));
    }
    let pauli_max = pauli.z_flipped.max(pauli.x_preserved).max(pauli.y_flipped);
    checks.push(Check::at_most(
        "pauli_conjugation",
        pauli_max,
        tolerances::PAULI_CONJUGATION,
        "U_π σ_z U_π = −σ_z, U_π σ_x U_π = σ_x, U_π σ_y U_π = −σ_y",
    ));
    if let Some(scan) = &sensitivity {
        checks.push(Check::at_most(
            "order_parameter_odd",
            odd_defect(scan),
            tolerances::ORDER_PARAMETER,
            "max |m(h) + m(−h)|",
        ));
        if let Some(zero) = scan.iter().find(|s| s.h == 0.0) {
            checks.push(Check::flag(
                "zero_field_degenerate",
                zero.is_degenerate(),
                format!("ground degeneracy {} at h = 0", zero.degeneracy),
            ));
        }
    }
    let results = SpinChainResults {
        dim: spec.dim(),
        bonds: spec.bonds(),
        ground_energy: gs.energy,
        ground_degeneracy: gs.degeneracy,
        commutators: Commutators {
            spin_flip,
            phase,
            su2_samples: p.su2_samples,
            su2_max,
        },
        pauli_conjugation: pauli,
        sensitivity,
    };
    Ok((results, checks))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSummary {
    pub labels: Vec<String>,
    pub n_sites: usize,
    pub boundary: Boundary,
    pub ens_size: usize,
    pub dims: ModelDims,
    pub evolution_time: f64,
    pub min_equal_amplitude_gap: f64,
    pub seeds_used: Vec<u64>,
    pub symmetry_commutators: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EqualAmplitude {
    pub counts: Vec<u64>,
    pub unresolved: u64,
    pub expected_each: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateResult {
    pub amplitudes: Vec<[f64; 2]>,
    pub born: Vec<f64>,
    pub counts: Vec<u64>,
    pub unresolved: u64,
    pub proportions: Vec<f64>,
    /// Absent when the squared moduli are not small-denominator rationals.
    pub fine_grain: Option<FineGrained>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BornResults {
    pub model: ModelSummary,
    pub equal_amplitude: Option<EqualAmplitude>,
    pub symmetry_rule: Vec<SymmetryRuleReport>,
    pub p1: Vec<PropertyReport>,
    pub p2: Vec<PropertyReport>,
    pub states: Vec<StateResult>,
}

pub const P1_PHASES: [f64; 4] = [0.0, 0.7, PI / 2.0, PI];
/// Generated states that P1 and P2 are checked on, beyond the user's.
const PROPERTY_STATES: usize = 6;

pub fn run_born(p: &BornParams, seed: u64) -> Result<(BornResults, Vec<Check>), CliError> {
    let chain = p.chain.expect("filled in by validation");
    let ens_size = p.ens_size.expect("filled in by validation");
    let spec = ChainSpec::new(chain.n_sites, chain.sign, chain.boundary).map_err(run_err)?;
    let demo = demo_model(&DemoSpec::new(p.n_labels, spec, ens_size, seed)).map_err(run_err)?;
    let n = p.n_labels;
    let wants = |c: BornCheck| p.checks.contains(&c);
    let mut checks = Vec::new();

    let equal_amplitude = if wants(BornCheck::EqualAmplitude) {
        let c = demo.counts(&demo.equal_amplitude_state(None).map_err(run_err)?).map_err(run_err)?;
        let expected_each = (ens_size / n) as u64;
        let exact = c.unresolved() == 0 && c.counts().iter().all(|&k| k == expected_each);
        checks.push(Check::flag(
            "equal_amplitude_counts",
            exact,
            format!("counts {:?} against {expected_each} each", c.counts()),
        ));
        Some(EqualAmplitude {
            counts: c.counts().to_vec(),
            unresolved: c.unresolved(),
            expected_each,
        })
    } else {
        None
    };

    let tests = demo.test_states(p.test_states).map_err(run_err)?;
    let mut symmetry_rule = Vec::new();
    if wants(BornCheck::SymmetryRule) {
        for sym in demo.standard_symmetries() {
            let r = demo.verify_symmetry_rule(&sym, &tests).map_err(run_err)?;
            checks.push(Check::flag(
                format!("symmetry_rule[{}]", r.symmetry),
                r.pass,
                format!("{} states, {} violations", r.rows.len(), r.violations.len()),
            ));
            symmetry_rule.push(r);
        }
    }

    let user: Vec<StateVector> = p
        .states
        .iter()
        .map(|s| StateVector::from_amplitudes(s.iter().map(|&[re, im]| Complex64::new(re, im)).collect()))
        .collect::<Result<_, _>>()
        .map_err(run_err)?;
    let property_states: Vec<&StateVector> = user.iter().chain(tests.iter().take(PROPERTY_STATES)).collect();
    let mut p1 = Vec::new();
    let mut p2 = Vec::new();
    if wants(BornCheck::P1) {
        for psi in &property_states {
            p1.push(demo.check_p1(psi, &P1_PHASES).map_err(run_err)?);
        }
        let failed = p1.iter().filter(|r| !r.pass).count();
        checks.push(Check::flag("p1", failed == 0, format!("{failed} of {} states fail", p1.len())));
    }
    if wants(BornCheck::P2) {
        for psi in &property_states {
            p2.push(demo.check_p2(psi).map_err(run_err)?);
        }
        let failed = p2.iter().filter(|r| !r.pass).count();
        checks.push(Check::flag("p2", failed == 0, format!("{failed} of {} states fail", p2.len())));
    }

    let mut states = Vec::new();
    for (i, (raw, psi)) in p.states.iter().zip(&user).enumerate() {
        let c = demo.counts(psi).map_err(run_err)?;
        let born = (0..n)
            .map(|j| born_probability(psi, j))
            .collect::<Result<Vec<_>, _>>()
            .map_err(run_err)?;
        let fg = fine_grain(psi.amplitudes()).ok();
        if let Some(f) = &fg {
            let dev = f.probabilities.iter().zip(&born).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            checks.push(Check::at_most(
                format!("fine_grain_matches_born[{i}]"),
                dev,
                tolerances::FINE_GRAIN,
                format!("{} equal-modulus branches", f.denominator),
            ));
        }
        states.push(StateResult {
            amplitudes: raw.clone(),
            born,
            counts: c.counts().to_vec(),
            unresolved: c.unresolved(),
            proportions: c.proportions(),
            fine_grain: fg,
        });
    }

    let d = demo.diagnostics();
    let results = BornResults {
        model: ModelSummary {
            labels: demo.model().labels().to_vec(),
            n_sites: chain.n_sites,
            boundary: chain.boundary,
            ens_size: demo.ensemble().len(),
            dims: demo.model().dims(),
            evolution_time: d.evolution_time,
            min_equal_amplitude_gap: d.min_equal_amplitude_gap,
            seeds_used: d.seeds_used.clone(),
            symmetry_commutators: d.symmetry_commutators.clone(),
        },
        equal_amplitude,
        symmetry_rule,
        p1,
        p2,
        states,
    };
    Ok((results, checks))
}
