//! The acceptance suite behind `verify-all`.

use std::sync::OnceLock;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;
use statrs::function::erf::erfc;

use rdsim::born::{born_probability, demo_model, fine_grain, DemoModel, DemoSpec};
use rdsim::harness::{chi_square_gof, NoiseDistribution, RngStream};
use rdsim::numeric::{hermitian_eigensystem, StateVector};
use rdsim::pendulum::{
    amplitudes, classify_energy, critical_velocity, energy, outcome_probabilities, outcome_sequence, run_pendulum_trials,
    ClassificationMode, OutcomeLR, PendulumError, PendulumExperiment,
};
use rdsim::spinchain::{
    build_heisenberg, commutator_norm, global_unitary, ground_space, pauli_conjugation_check, sensitivity_scan, u_pi,
    Boundary, ChainSpec,
};
use rdsim::tolerances;

use crate::config::default_fields;
use crate::experiments::{max_su2_commutator, odd_defect, su2_samples};
use crate::report::{Check, Report};
use crate::CliError;

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "pendulum critical velocity"),
    (2, "outcome-probability integrals"),
    (3, "monte carlo consistency"),
    (4, "amplitude normalization"),
    (5, "chain symmetries"),
    (6, "ground-space structure"),
    (7, "rd sensitivity"),
    (8, "symmetry rule"),
    (9, "equal-amplitude theorem"),
    (10, "fine-graining vs born"),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub checks: Vec<Check>,
}

/// Shared state for one suite run; the demo models are built on first use.
pub struct VerifyContext {
    pub seed: u64,
    pub workers: usize,
    demos: [OnceLock<Result<DemoModel, String>>; 3],
}

impl VerifyContext {
    pub fn new(seed: u64, workers: usize) -> Self {
        Self {
            seed,
            workers,
            demos: Default::default(),
        }
    }

    pub fn demo(&self, n_labels: usize) -> Result<&DemoModel, CliError> {
        self.demos[n_labels - 2]
            .get_or_init(|| {
                DemoSpec::shipped(n_labels, self.seed)
                    .and_then(|s| demo_model(&s))
                    .map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(|e| CliError::Run(format!("demo model with {n_labels} labels: {e}")))
    }
}

fn err(e: impl std::fmt::Display) -> CliError {
    CliError::Run(e.to_string())
}

/// Standard normal CDF.
fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn critical_velocity_checks() -> Vec<Check> {
    let vc = critical_velocity();
    let below = f64::from_bits(2f64.to_bits() - 1);
    let above = f64::from_bits(2f64.to_bits() + 1);
    let switches = classify_energy(below).ok() == Some(OutcomeLR::L)
        && classify_energy(above).ok() == Some(OutcomeLR::R)
        && matches!(classify_energy(2.0), Err(PendulumError::Separatrix(_)));
    vec![
        Check::at_most("critical_velocity_is_two", (vc - 2.0).abs(), 0.0, format!("φ̇₀ = {vc}")),
        Check::at_most(
            "energy_reaches_top",
            (energy(0.0, vc) + std::f64::consts::PI.cos()).abs(),
            0.0,
            "E(0, φ̇₀) = −cos π",
        ),
        Check::flag("switch_at_two", switches, "L just below 2, R just above, separatrix at 2"),
    ]
}

fn quadrature_checks() -> Result<Vec<Check>, CliError> {
    let gauss = NoiseDistribution::gaussian(0.0, 1.0).map_err(err)?;
    let mut worst: f64 = 0.0;
    for delta in [-1.0, 0.0, 0.5, 1.0] {
        let (p_l, p_r) = outcome_probabilities(delta, &gauss).map_err(err)?;
        worst = worst.max((p_r - normal_cdf(delta)).abs()).max((p_l - normal_cdf(-delta)).abs());
    }
    let uniform = NoiseDistribution::uniform(-1.0, 1.0).map_err(err)?;
    let (_, p_r) = outcome_probabilities(0.5, &uniform).map_err(err)?;
    Ok(vec![
        Check::at_most("gaussian_vs_normal_cdf", worst, 1e-6, "delta in {−1, 0, 0.5, 1}"),
        Check::at_most("uniform_half_offset", (p_r - 0.75).abs(), 1e-9, format!("p_R = {p_r}")),
    ])
}

const MC_TRIALS: u64 = 100_000;

fn monte_carlo_checks(ctx: &VerifyContext) -> Result<Vec<Check>, CliError> {
    let exp = PendulumExperiment::new(0.0, NoiseDistribution::gaussian(0.0, 1.0).map_err(err)?);
    let counts = run_pendulum_trials(&exp, MC_TRIALS, ctx.seed, ClassificationMode::Energy, ctx.workers).map_err(err)?;
    let p_hat = counts.proportion(1);
    let bound = tolerances::STAT_SIGMAS * (0.25 / MC_TRIALS as f64).sqrt();
    let gof = chi_square_gof(&counts, &[0.5, 0.5], tolerances::FIVE_SIGMA_ALPHA).map_err(err)?;

    let energy_seq = outcome_sequence(&exp, MC_TRIALS, ctx.seed, ClassificationMode::Energy, ctx.workers).map_err(err)?;
    let dyn_seq = outcome_sequence(&exp, MC_TRIALS, ctx.seed, ClassificationMode::Dynamics, ctx.workers).map_err(err)?;
    let mut compared = 0u64;
    let mut mismatches = 0u64;
    for (i, (e, d)) in energy_seq.iter().zip(&dyn_seq).enumerate() {
        let v = exp.effective_velocity(ctx.seed, i as u64);
        if (v - critical_velocity()).abs() > tolerances::SEPARATRIX_GUARD {
            compared += 1;
            mismatches += u64::from(e != d);
        }
    }
    Ok(vec![
        Check::at_most(
            "p_hat_r_within_5_sigma",
            (p_hat - 0.5).abs(),
            bound,
            format!("p̂_R = {p_hat} over {MC_TRIALS} trials"),
        ),
        Check::at_most(
            "chi_square_gof",
            gof.statistic,
            gof.critical_value,
            format!("{} dof at alpha {:e}", gof.dof, gof.alpha),
        ),
        Check::at_most(
            "dynamics_matches_energy",
            mismatches as f64,
            0.0,
            format!("{compared} trials outside the separatrix guard band"),
        ),
    ])
}

/// Random noise model for the normalization sweep.
fn random_noise(rng: &mut RngStream, i: usize) -> Result<NoiseDistribution, CliError> {
    let u = |rng: &mut RngStream, lo: f64, hi: f64| lo + (hi - lo) * rng.uniform();
    let noise = match i % 3 {
        0 => NoiseDistribution::gaussian(u(rng, -1.0, 1.0), u(rng, 0.05, 3.0)),
        1 => {
            let a = u(rng, -2.0, 0.5);
            NoiseDistribution::uniform(a, a + u(rng, 0.1, 3.0))
        }
        _ => {
            // triangle of half-width w about c
            let (c, w) = (u(rng, -1.0, 1.0), u(rng, 0.1, 2.0));
            NoiseDistribution::tabulated(vec![c - w, c, c + w], vec![0.0, 1.0 / w, 0.0])
        }
    };
    noise.map_err(err)
}

const NORMALIZATION_SETTINGS: usize = 1000;

fn normalization_checks(ctx: &VerifyContext) -> Result<Vec<Check>, CliError> {
    let mut rng = RngStream::new(ctx.seed, 4);
    let mut worst: f64 = 0.0;
    for i in 0..NORMALIZATION_SETTINGS {
        let noise = random_noise(&mut rng, i)?;
        let delta = -3.0 + 6.0 * rng.uniform();
        let (p_l, p_r) = outcome_probabilities(delta, &noise).map_err(err)?;
        let (q_l, q_r) = amplitudes(p_l, p_r).map_err(err)?;
        worst = worst.max((q_l * q_l + q_r * q_r - 1.0).abs());
    }
    Ok(vec![Check::at_most(
        "q_squares_sum_to_one",
        worst,
        tolerances::NORMALIZATION,
        format!("{NORMALIZATION_SETTINGS} gaussian, uniform and triangular settings"),
    )])
}

const SU2_SAMPLES: usize = 100;
const MAX_CHECKED_SITES: usize = 8;

fn chain_symmetry_checks(ctx: &VerifyContext) -> Result<Vec<Check>, CliError> {
    let samples = su2_samples(ctx.seed, SU2_SAMPLES);
    let (mut su2, mut flip): (f64, f64) = (0.0, 0.0);
    let mut chains = 0;
    for n in 2..=MAX_CHECKED_SITES {
        for sign in [1, -1] {
            for boundary in [Boundary::Open, Boundary::Periodic] {
                let spec = ChainSpec::new(n, sign, boundary).map_err(err)?;
                su2 = su2.max(max_su2_commutator(&spec, &samples)?);
                let h = build_heisenberg(&spec).map_err(err)?;
                let u = global_unitary(&u_pi(), n).map_err(err)?;
                flip = flip.max(commutator_norm(&h, &u).map_err(err)?);
                chains += 1;
            }
        }
    }
    let pauli = pauli_conjugation_check().map_err(err)?;
    let tol = tolerances::CHAIN_SYMMETRY;
    Ok(vec![
        Check::at_most("su2_commutator", su2, tol, format!("{chains} chains × {SU2_SAMPLES} rotations")),
        Check::at_most("spin_flip_commutator", flip, tol, format!("{chains} chains")),
        Check::at_most("u_pi_flips_sigma_z", pauli.z_flipped, tolerances::PAULI_CONJUGATION, "U_π σ_z U_π = −σ_z"),
        Check::at_most("u_pi_keeps_sigma_x", pauli.x_preserved, tolerances::PAULI_CONJUGATION, "U_π σ_x U_π = σ_x"),
        Check::at_most("u_pi_flips_sigma_y", pauli.y_flipped, tolerances::PAULI_CONJUGATION, "U_π σ_y U_π = −σ_y"),
    ])
}

fn ground_space_checks() -> Result<Vec<Check>, CliError> {
    let h = build_heisenberg(&ChainSpec::antiferromagnetic(2, Boundary::Open).map_err(err)?).map_err(err)?;
    let es = hermitian_eigensystem(&h).map_err(err)?;
    let spectrum_dev = es
        .eigenvalues
        .iter()
        .zip([-3.0, 1.0, 1.0, 1.0])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let gs = ground_space(&h, tolerances::DEGENERACY).map_err(err)?;
    let r = 0.5f64.sqrt();
    let singlet = StateVector::from_real(&[0.0, r, -r, 0.0]).map_err(err)?;
    let overlap = gs.states[0].inner(&singlet).map_err(err)?.norm_sqr();

    let fm = build_heisenberg(&ChainSpec::ferromagnetic(3, Boundary::Open).map_err(err)?).map_err(err)?;
    let fm_gs = ground_space(&fm, tolerances::DEGENERACY).map_err(err)?;
    let fm_es = hermitian_eigensystem(&fm).map_err(err)?;
    let dense_count = fm_es
        .eigenvalues
        .iter()
        .filter(|&&e| e - fm_es.eigenvalues[0] <= tolerances::DEGENERACY)
        .count();
    Ok(vec![
        Check::at_most("afm2_spectrum", spectrum_dev, 1e-12, "eigenvalues {−3, 1, 1, 1}"),
        Check::flag(
            "afm2_singlet_ground_state",
            gs.degeneracy == 1 && (gs.energy + 3.0).abs() <= 1e-12 && (overlap - 1.0).abs() <= 1e-12,
            format!("E₀ = {}, |⟨singlet|g⟩|² = {overlap}", gs.energy),
        ),
        Check::flag(
            "fm3_open_degeneracy",
            fm_gs.degeneracy == 4 && dense_count == 4,
            format!("ground space {} states, dense spectrum {dense_count}", fm_gs.degeneracy),
        ),
    ])
}

fn sensitivity_checks() -> Result<Vec<Check>, CliError> {
    let spec = ChainSpec::ferromagnetic(4, Boundary::Open).map_err(err)?;
    let scan = sensitivity_scan(&spec, &default_fields()).map_err(err)?;
    let m_at = |h: f64| scan.iter().find(|p| p.h == h).and_then(|p| p.order_parameter);
    let tiny = match (m_at(1e-6), m_at(-1e-6)) {
        (Some(up), Some(down)) => (up - 1.0).abs().max((down + 1.0).abs()),
        _ => f64::INFINITY,
    };
    let zero_degenerate = scan.iter().any(|p| p.h == 0.0 && p.is_degenerate());
    Ok(vec![
        Check::at_most("m_at_tiny_field", tiny, tolerances::ORDER_PARAMETER, "m(±1e-6) = ±1"),
        Check::at_most("m_is_odd", odd_defect(&scan), tolerances::ORDER_PARAMETER, "max |m(h) + m(−h)| over the grid"),
        Check::flag("zero_field_degenerate", zero_degenerate, "h = 0 has no unique ground state"),
    ])
}

const RULE_TEST_STATES: usize = 20;

fn symmetry_rule_checks(ctx: &VerifyContext) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    for n in [2, 3] {
        let demo = ctx.demo(n)?;
        let tests = demo.test_states(RULE_TEST_STATES).map_err(err)?;
        for (property, sym) in [("p1", demo.phase_symmetry(0.7)), ("p2", demo.flip_symmetry())] {
            let r = demo.verify_symmetry_rule(&sym, &tests).map_err(err)?;
            checks.push(Check::flag(
                format!("{property}_n{n}"),
                r.pass && r.rows.len() >= RULE_TEST_STATES,
                format!(
                    "{}: ι = {:?}, {} states, {} violations",
                    r.symmetry,
                    r.iota,
                    r.rows.len(),
                    r.violations.len()
                ),
            ));
        }
    }
    Ok(checks)
}

fn equal_amplitude_checks(ctx: &VerifyContext) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    for n in [2, 3, 4] {
        let demo = ctx.demo(n)?;
        let size = demo.ensemble().len() as u64;
        for (tag, phases) in [("real", None), ("phased", Some([0.3, -1.2, 2.2, 0.9]))] {
            let psi = demo.equal_amplitude_state(phases.as_ref().map(|p| &p[..])).map_err(err)?;
            let c = demo.counts(&psi).map_err(err)?;
            let exact = c.unresolved() == 0 && c.counts().iter().all(|&k| k * n as u64 == size);
            checks.push(Check::flag(
                format!("n{n}_{tag}"),
                exact,
                format!("counts {:?} of {size}", c.counts()),
            ));
        }
    }
    Ok(checks)
}

const RATIONAL_VECTORS: usize = 100;
const MAX_TOTAL_WEIGHT: u64 = 64;

/// Amplitudes whose squared moduli are `weights / M` with `M ≤ 64`.
fn rational_amplitudes(rng: &mut RngStream) -> Vec<Complex64> {
    let n = 2 + (rng.next_u64() % 4) as usize;
    let m_total = n as u64 + rng.next_u64() % (MAX_TOTAL_WEIGHT + 1 - n as u64);
    let mut cuts: Vec<u64> = (0..n - 1).map(|_| rng.next_u64() % (m_total + 1)).collect();
    cuts.sort_unstable();
    let mut prev = 0;
    cuts.into_iter()
        .chain(std::iter::once(m_total))
        .map(|c| {
            let w = c - prev;
            prev = c;
            Complex64::from_polar((w as f64 / m_total as f64).sqrt(), std::f64::consts::TAU * rng.uniform())
        })
        .collect()
}

fn fine_grain_checks(ctx: &VerifyContext) -> Result<Vec<Check>, CliError> {
    let mut rng = RngStream::new(ctx.seed, 10);
    let third = [Complex64::new((1.0f64 / 3.0).sqrt(), 0.0), Complex64::new((2.0f64 / 3.0).sqrt(), 0.0)];
    let mut vectors = vec![third.to_vec()];
    vectors.extend((0..RATIONAL_VECTORS).map(|_| rational_amplitudes(&mut rng)));
    let mut worst: f64 = 0.0;
    for amps in &vectors {
        let f = fine_grain(amps).map_err(err)?;
        let psi = StateVector::from_amplitudes(amps.clone()).map_err(err)?;
        for (j, p) in f.probabilities.iter().enumerate() {
            worst = worst.max((p - born_probability(&psi, j).map_err(err)?).abs());
        }
    }
    let f = fine_grain(&third).map_err(err)?;
    Ok(vec![
        Check::at_most(
            "fine_grain_equals_born",
            worst,
            tolerances::FINE_GRAIN,
            format!("{} vectors including (1/3, 2/3)", vectors.len()),
        ),
        Check::flag(
            "one_third_two_thirds",
            f.denominator == 3 && f.branch_counts == [1, 2],
            format!("{:?} of {}", f.branch_counts, f.denominator),
        ),
    ])
}

/// Runs criterion `id` (1 to 10).
pub fn run_criterion(id: u8, ctx: &VerifyContext) -> Result<Criterion, CliError> {
    let checks = match id {
        1 => critical_velocity_checks(),
        2 => quadrature_checks()?,
        3 => monte_carlo_checks(ctx)?,
        4 => normalization_checks(ctx)?,
        5 => chain_symmetry_checks(ctx)?,
        6 => ground_space_checks()?,
        7 => sensitivity_checks()?,
        8 => symmetry_rule_checks(ctx)?,
        9 => equal_amplitude_checks(ctx)?,
        10 => fine_grain_checks(ctx)?,
        other => return Err(CliError::Run(format!("no criterion {other}"))),
    };
    let name = CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("");
    Ok(Criterion {
        id,
        name,
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResults {
    pub criteria: Vec<Criterion>,
}

pub fn verify_all(seed: u64, workers: usize) -> Result<Report, CliError> {
    let started = Instant::now();
    let ctx = VerifyContext::new(seed, workers);
    let criteria = CRITERIA
        .iter()
        .map(|&(id, _)| run_criterion(id, &ctx))
        .collect::<Result<Vec<_>, _>>()?;
    let checks = criteria
        .iter()
        .map(|c| {
            let failed: Vec<&str> = c.checks.iter().filter(|x| !x.pass).map(|x| x.name.as_str()).collect();
            let mut detail = c.name.to_string();
            if !failed.is_empty() {
                detail += &format!("; failed: {}", failed.join(", "));
            }
            Check::flag(format!("criterion_{}", c.id), c.pass, detail)
        })
        .collect();
    Ok(Report::new(
        "verify-all",
        serde_json::json!({ "seed": seed }),
        SuiteResults { criteria },
        checks,
        started,
    ))
}
