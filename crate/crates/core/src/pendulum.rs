//! Pendulum balanced on its separatrix.
//!
//! Natural units (mass = length = g = 1): `φ̈ + sin φ = 0`, energy
//! `E = ½φ̇² − cos φ`. Starting from the bottom, the pendulum reaches the top
//! exactly when `½φ̇₀² − 1 = 1`. An environmental kick `Δφ̇_E` added to the
//! prepared offset `Δφ̇₀` then decides the outcome.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::{self, HarnessError, NoiseDistribution, OutcomeCounts, RngStream};
use crate::tolerances;

pub const LABELS: [&str; 2] = ["L", "R"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PendulumError {
    #[error("step size and horizon must be positive and finite (dt={dt}, t_max={t_max})")]
    InvalidStep { dt: f64, t_max: f64 },
    #[error("non-finite pendulum state at t={0}")]
    NonFinite(f64),
    #[error("effective velocity {0} lies exactly on the separatrix; outcome unresolved")]
    Separatrix(f64),
    #[error("probabilities must lie in [0, 1] and sum to 1 (got p_L={p_l}, p_R={p_r})")]
    InvalidProbabilities { p_l: f64, p_r: f64 },
    #[error("noise density integrates to {0}, not 1")]
    NotNormalized(f64),
    #[error(transparent)]
    Harness(#[from] HarnessError),
}

pub type Result<T> = std::result::Result<T, PendulumError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OutcomeLR {
    L,
    R,
}

impl OutcomeLR {
    pub fn index(self) -> usize {
        match self {
            Self::L => 0,
            Self::R => 1,
        }
    }

    pub fn label(self) -> &'static str {
        LABELS[self.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendulumState {
    pub phi: f64,
    pub phi_dot: f64,
    pub time: f64,
}

impl PendulumState {
    pub fn new(phi: f64, phi_dot: f64) -> Self {
        Self { phi, phi_dot, time: 0.0 }
    }

    pub fn energy(&self) -> f64 {
        energy(self.phi, self.phi_dot)
    }

    fn is_finite(&self) -> bool {
        self.phi.is_finite() && self.phi_dot.is_finite()
    }
}

pub fn energy(phi: f64, phi_dot: f64) -> f64 {
    0.5 * phi_dot * phi_dot - phi.cos()
}

/// Launch speed from the bottom that just reaches the top:
/// `½φ̇₀² − cos 0 = −cos π`, i.e. `φ̇₀ = √(2·(1 + 1))`.
pub fn critical_velocity() -> f64 {
    let top = -std::f64::consts::PI.cos();
    let bottom = -(0.0f64).cos();
    (2.0 * (top - bottom)).sqrt()
}

/// Outcome from the sign of `phi_dot_eff − 2`.
pub fn classify_energy(phi_dot_eff: f64) -> Result<OutcomeLR> {
    let vc = critical_velocity();
    if phi_dot_eff > vc {
        Ok(OutcomeLR::R)
    } else if phi_dot_eff < vc {
        Ok(OutcomeLR::L)
    } else {
        Err(PendulumError::Separatrix(phi_dot_eff))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    /// Velocity Verlet: second order, symplectic.
    #[default]
    Leapfrog,
    /// Classical fourth-order Runge–Kutta.
    Rk4,
}

impl Integrator {
    fn step(self, s: &mut PendulumState, dt: f64) {
        match self {
            Self::Leapfrog => {
                let half = s.phi_dot - 0.5 * dt * s.phi.sin();
                s.phi += dt * half;
                s.phi_dot = half - 0.5 * dt * s.phi.sin();
            }
            Self::Rk4 => {
                let (p, v) = (s.phi, s.phi_dot);
                let (k1p, k1v) = (v, -p.sin());
                let (k2p, k2v) = (v + 0.5 * dt * k1v, -(p + 0.5 * dt * k1p).sin());
                let (k3p, k3v) = (v + 0.5 * dt * k2v, -(p + 0.5 * dt * k2p).sin());
                let (k4p, k4v) = (v + dt * k3v, -(p + dt * k3p).sin());
                s.phi = p + dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
                s.phi_dot = v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            }
        }
        s.time += dt;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    /// Linearly interpolated time at which `|φ| = π`.
    pub time: f64,
    pub side: OutcomeLR,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub states: Vec<PendulumState>,
    pub crossing: Option<Crossing>,
}

fn check_step(dt: f64, t_max: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite() && t_max > 0.0 && t_max.is_finite()) {
        return Err(PendulumError::InvalidStep { dt, t_max });
    }
    Ok(())
}

fn top_crossing(prev: &PendulumState, cur: &PendulumState) -> Option<Crossing> {
    use std::f64::consts::PI;
    let (target, side) = if cur.phi >= PI {
        (PI, OutcomeLR::R)
    } else if cur.phi <= -PI {
        (-PI, OutcomeLR::L)
    } else {
        return None;
    };
    let span = cur.phi - prev.phi;
    let frac = if span == 0.0 { 1.0 } else { ((target - prev.phi) / span).clamp(0.0, 1.0) };
    Some(Crossing {
        time: prev.time + frac * (cur.time - prev.time),
        side,
    })
}

/// Integrates from `start` until `t_max` or until the top is crossed.
pub fn integrate(start: PendulumState, dt: f64, t_max: f64, integrator: Integrator) -> Result<Trajectory> {
    check_step(dt, t_max)?;
    if !start.is_finite() {
        return Err(PendulumError::NonFinite(start.time));
    }
    let n_steps = (t_max / dt).ceil() as usize;
    let mut states = Vec::with_capacity(n_steps.min(1 << 20) + 1);
    states.push(start);
    if start.phi.abs() >= std::f64::consts::PI {
        let side = if start.phi > 0.0 { OutcomeLR::R } else { OutcomeLR::L };
        let crossing = Some(Crossing { time: start.time, side });
        return Ok(Trajectory { states, crossing });
    }
    let mut s = start;
    for _ in 0..n_steps {
        let prev = s;
        integrator.step(&mut s, dt);
        if !s.is_finite() {
            return Err(PendulumError::NonFinite(s.time));
        }
        states.push(s);
        if let Some(c) = top_crossing(&prev, &s) {
            return Ok(Trajectory { states, crossing: Some(c) });
        }
    }
    Ok(Trajectory { states, crossing: None })
}

/// Classifies a launch from the bottom by integrating the motion.
///
/// Crossing `+π` is R. Crossing `−π`, a non-positive launch or turning back
/// is L. Launches within the separatrix guard band and runs that reach
/// `t_max` undecided are unresolved (`Ok(None)`).
pub fn classify_dynamics(phi_dot_eff: f64, dt: f64, t_max: f64, integrator: Integrator) -> Result<Option<OutcomeLR>> {
    check_step(dt, t_max)?;
    if !phi_dot_eff.is_finite() {
        return Err(PendulumError::NonFinite(0.0));
    }
    if (phi_dot_eff - critical_velocity()).abs() <= tolerances::SEPARATRIX_GUARD {
        return Ok(None);
    }
    if phi_dot_eff <= 0.0 {
        return Ok(Some(OutcomeLR::L));
    }
    let mut s = PendulumState::new(0.0, phi_dot_eff);
    let n_steps = (t_max / dt).ceil() as usize;
    for _ in 0..n_steps {
        let prev = s;
        integrator.step(&mut s, dt);
        if !s.is_finite() {
            return Err(PendulumError::NonFinite(s.time));
        }
        if let Some(c) = top_crossing(&prev, &s) {
            return Ok(Some(c.side));
        }
        if s.phi_dot < 0.0 {
            return Ok(Some(OutcomeLR::L));
        }
    }
    Ok(None)
}

/// `(p_L, p_R)` with `p_R = ∫_{−δ}^{∞} p_E` and `p_L = ∫_{−∞}^{−δ} p_E`.
pub fn outcome_probabilities(delta: f64, noise: &NoiseDistribution) -> Result<(f64, f64)> {
    noise.validate()?;
    let mass = noise.total_mass()?;
    if (mass - 1.0).abs() > tolerances::DENSITY_NORMALIZATION {
        return Err(PendulumError::NotNormalized(mass));
    }
    // quadrature of the full mass can round just past 1
    let p_r = noise.mass_between(-delta, f64::INFINITY)?.clamp(0.0, 1.0);
    let p_l = noise.mass_between(f64::NEG_INFINITY, -delta)?.clamp(0.0, 1.0);
    if (p_l + p_r - 1.0).abs() > tolerances::PROBABILITY_SUM {
        return Err(PendulumError::NotNormalized(p_l + p_r));
    }
    Ok((p_l, p_r))
}

/// `q = √p`, renormalized so that `q_L² + q_R² = 1` exactly up to rounding.
pub fn amplitudes(p_l: f64, p_r: f64) -> Result<(f64, f64)> {
    let bad = || PendulumError::InvalidProbabilities { p_l, p_r };
    if !(0.0..=1.0).contains(&p_l) || !(0.0..=1.0).contains(&p_r) {
        return Err(bad());
    }
    let sum = p_l + p_r;
    if (sum - 1.0).abs() > tolerances::PROBABILITY_SUM {
        return Err(bad());
    }
    Ok(((p_l / sum).sqrt(), (p_r / sum).sqrt()))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassificationMode {
    #[default]
    Energy,
    Dynamics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendulumExperiment {
    pub delta_phi_dot_0: f64,
    pub noise: NoiseDistribution,
    pub t_max: f64,
    pub dt: f64,
    #[serde(default)]
    pub integrator: Integrator,
}

impl PendulumExperiment {
    pub fn new(delta_phi_dot_0: f64, noise: NoiseDistribution) -> Self {
        Self {
            delta_phi_dot_0,
            noise,
            t_max: 100.0,
            dt: 1e-3,
            integrator: Integrator::Leapfrog,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.delta_phi_dot_0.is_finite() {
            return Err(PendulumError::NonFinite(0.0));
        }
        check_step(self.dt, self.t_max)?;
        self.noise.validate()?;
        Ok(())
    }

    /// `2 + Δφ̇₀ + Δφ̇_E` for trial `index`; the kick is the first draw of
    /// the trial's own stream.
    pub fn effective_velocity(&self, seed: u64, index: u64) -> f64 {
        let mut rng = RngStream::new(seed, index);
        self.effective_velocity_from(&mut rng)
    }

    fn effective_velocity_from(&self, rng: &mut RngStream) -> f64 {
        critical_velocity() + self.delta_phi_dot_0 + self.noise.sample(rng)
    }

    fn classify(&self, v: f64, mode: ClassificationMode) -> Option<OutcomeLR> {
        match mode {
            ClassificationMode::Energy => classify_energy(v).ok(),
            // step size and horizon are validated up front
            ClassificationMode::Dynamics => classify_dynamics(v, self.dt, self.t_max, self.integrator)
                .ok()
                .flatten(),
        }
    }
}

/// Per-trial outcomes (`None` for unresolved), in trial order.
pub fn outcome_sequence(
    exp: &PendulumExperiment,
    n: u64,
    seed: u64,
    mode: ClassificationMode,
    workers: usize,
) -> Result<Vec<Option<OutcomeLR>>> {
    exp.validate()?;
    let raw = harness::trial_outcomes(n, seed, workers, |_, rng| {
        let v = exp.effective_velocity_from(rng);
        exp.classify(v, mode).map(OutcomeLR::index)
    })?;
    Ok(raw
        .into_iter()
        .map(|o| o.map(|i| if i == 0 { OutcomeLR::L } else { OutcomeLR::R }))
        .collect())
}

pub fn run_pendulum_trials(
    exp: &PendulumExperiment,
    n: u64,
    seed: u64,
    mode: ClassificationMode,
    workers: usize,
) -> Result<OutcomeCounts> {
    exp.validate()?;
    Ok(harness::run_trials(&LABELS, n, seed, workers, |_, rng| {
        let v = exp.effective_velocity_from(rng);
        exp.classify(v, mode).map(OutcomeLR::index)
    })?)
}
