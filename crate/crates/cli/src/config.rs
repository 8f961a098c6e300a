//! Experiment configuration files.
//!
//! One experiment per JSON file. Every block rejects unknown keys and all
//! values are validated before anything runs; errors carry the dotted path
//! of the offending field.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use rdsim::harness::NoiseDistribution;
use rdsim::pendulum::{ClassificationMode, Integrator};
use rdsim::spinchain::{Boundary, MAX_SITES};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Pendulum,
    Spinchain,
    Born,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Pendulum => "pendulum",
            Self::Spinchain => "spinchain",
            Self::Born => "born",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kind: Kind,
    #[serde(default)]
    seed: Option<u64>,
    parameters: serde_json::Value,
    #[serde(default)]
    output: Option<OutputSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Parameters {
    Pendulum(PendulumParams),
    Spinchain(SpinChainParams),
    Born(BornParams),
}

/// A parsed and validated experiment. Serializes back to the file format
/// with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub seed: u64,
    pub parameters: Parameters,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PendulumParams {
    /// Controlled offset `Δφ̇₀` from the critical velocity.
    pub delta: f64,
    pub noise: NoiseDistribution,
    pub n_trials: u64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default)]
    pub mode: ClassificationMode,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinChainParams {
    pub n_sites: usize,
    /// `+1` antiferromagnet, `-1` ferromagnet.
    pub sign: i64,
    pub boundary: Boundary,
    #[serde(default = "default_fields")]
    pub fields: Vec<f64>,
    #[serde(default = "default_su2_samples")]
    pub su2_samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainParams {
    pub n_sites: usize,
    pub sign: i64,
    pub boundary: Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BornCheck {
    EqualAmplitude,
    SymmetryRule,
    P1,
    P2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BornParams {
    pub n_labels: usize,
    /// Defaults to the shipped chain for `n_labels`.
    #[serde(default)]
    pub chain: Option<ChainParams>,
    #[serde(default)]
    pub ens_size: Option<usize>,
    /// System states as `[re, im]` amplitude pairs.
    #[serde(default)]
    pub states: Vec<Vec<[f64; 2]>>,
    #[serde(default = "default_test_states")]
    pub test_states: usize,
    #[serde(default = "default_checks")]
    pub checks: Vec<BornCheck>,
}

fn default_dt() -> f64 {
    1e-3
}

fn default_t_max() -> f64 {
    100.0
}

fn default_confidence() -> f64 {
    0.95
}

pub fn default_fields() -> Vec<f64> {
    vec![-1e-2, -1e-4, -1e-6, 0.0, 1e-6, 1e-4, 1e-2]
}

fn default_su2_samples() -> usize {
    100
}

fn default_test_states() -> usize {
    20
}

fn default_checks() -> Vec<BornCheck> {
    vec![BornCheck::EqualAmplitude, BornCheck::SymmetryRule, BornCheck::P1, BornCheck::P2]
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Validation {
        field: field.into(),
        message: message.into(),
    }
}

fn typed<T: DeserializeOwned>(value: serde_json::Value, prefix: &str) -> Result<T, CliError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." || path.is_empty() { prefix.to_string() } else { format!("{prefix}.{path}") };
        invalid(field, e.into_inner().to_string())
    })
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| invalid("config", format!("not valid JSON: {e}")))?;
        let raw: RawConfig = typed(value, "config").map_err(|e| match e {
            // report top-level paths without the synthetic prefix
            CliError::Validation { field, message } => CliError::Validation {
                field: field.strip_prefix("config.").unwrap_or(&field).to_string(),
                message,
            },
            other => other,
        })?;
        let parameters = match raw.kind {
            Kind::Pendulum => Parameters::Pendulum(typed(raw.parameters, "parameters")?),
            Kind::Spinchain => Parameters::Spinchain(typed(raw.parameters, "parameters")?),
            Kind::Born => Parameters::Born(typed(raw.parameters, "parameters")?),
        };
        let seed = raw
            .seed
            .ok_or_else(|| invalid("seed", "missing (set it in the config or pass --seed)"))?;
        let mut cfg = Self {
            kind: raw.kind,
            seed,
            parameters,
            output: raw.output,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses a file, letting `seed_override` stand in for a missing or
    /// different `seed`.
    pub fn load(path: &Path, seed_override: Option<u64>) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        match seed_override {
            None => Self::from_json(&text),
            Some(seed) => {
                let mut value: serde_json::Value =
                    serde_json::from_str(&text).map_err(|e| invalid("config", format!("not valid JSON: {e}")))?;
                if let Some(obj) = value.as_object_mut() {
                    obj.insert("seed".into(), seed.into());
                }
                Self::from_json(&value.to_string())
            }
        }
    }

    pub fn validate(&mut self) -> Result<(), CliError> {
        match &mut self.parameters {
            Parameters::Pendulum(p) => p.validate(),
            Parameters::Spinchain(p) => p.validate(),
            Parameters::Born(p) => p.validate(),
        }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

fn finite(field: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be finite (got {x})")))
    }
}

impl PendulumParams {
    fn validate(&self) -> Result<(), CliError> {
        finite("parameters.delta", self.delta)?;
        if self.n_trials == 0 {
            return Err(invalid("parameters.n_trials", "must be positive"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid("parameters.dt", format!("must be a positive step (got {})", self.dt)));
        }
        if !(self.t_max.is_finite() && self.t_max >= self.dt) {
            return Err(invalid("parameters.t_max", format!("must be finite and at least dt (got {})", self.t_max)));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(invalid("parameters.confidence", format!("must lie in (0, 1) (got {})", self.confidence)));
        }
        let mass = self
            .noise
            .validate()
            .and_then(|_| self.noise.total_mass())
            .map_err(|e| invalid("parameters.noise", e.to_string()))?;
        if (mass - 1.0).abs() > rdsim::tolerances::DENSITY_NORMALIZATION {
            return Err(invalid("parameters.noise", format!("density integrates to {mass}, not 1")));
        }
        Ok(())
    }
}

impl SpinChainParams {
    fn validate(&self) -> Result<(), CliError> {
        check_chain("parameters", self.n_sites, self.sign)?;
        for (i, &h) in self.fields.iter().enumerate() {
            finite(&format!("parameters.fields[{i}]"), h)?;
        }
        if self.su2_samples > 10_000 {
            return Err(invalid("parameters.su2_samples", "at most 10000"));
        }
        Ok(())
    }
}

fn check_chain(prefix: &str, n_sites: usize, sign: i64) -> Result<(), CliError> {
    if !(2..=MAX_SITES).contains(&n_sites) {
        return Err(invalid(format!("{prefix}.n_sites"), format!("must be between 2 and {MAX_SITES} (got {n_sites})")));
    }
    if sign != 1 && sign != -1 {
        return Err(invalid(format!("{prefix}.sign"), format!("must be +1 or -1 (got {sign})")));
    }
    Ok(())
}

/// `(n_sites, ens_size)` of the shipped tipping models.
pub fn shipped_shape(n_labels: usize) -> Option<(usize, usize)> {
    match n_labels {
        2 => Some((4, 64)),
        3 => Some((3, 36)),
        4 => Some((4, 48)),
        _ => None,
    }
}

impl BornParams {
    fn validate(&mut self) -> Result<(), CliError> {
        let n = self.n_labels;
        let (sites, ens) = shipped_shape(n)
            .ok_or_else(|| invalid("parameters.n_labels", format!("must be 2, 3 or 4 (got {n})")))?;
        let chain = *self.chain.get_or_insert(ChainParams {
            n_sites: sites,
            sign: -1,
            boundary: Boundary::Open,
        });
        check_chain("parameters.chain", chain.n_sites, chain.sign)?;
        if chain.sign != -1 {
            return Err(invalid("parameters.chain.sign", "the tipping model needs a ferromagnetic chain (-1)"));
        }
        if !chain.n_sites.is_multiple_of(n) {
            return Err(invalid(
                "parameters.chain.n_sites",
                format!("must be divisible by n_labels {n} (got {})", chain.n_sites),
            ));
        }
        let dim = (n as u64).pow(chain.n_sites as u32 + 1) * 2;
        if dim > rdsim::numeric::MAX_DIMENSION as u64 {
            return Err(invalid(
                "parameters.chain.n_sites",
                format!("total dimension {dim} exceeds {}", rdsim::numeric::MAX_DIMENSION),
            ));
        }
        let orbit: usize = (1..=n).product();
        let ens_size = *self.ens_size.get_or_insert(ens);
        if ens_size == 0 || !ens_size.is_multiple_of(orbit) {
            return Err(invalid(
                "parameters.ens_size",
                format!("must be a positive multiple of {orbit} (got {ens_size})"),
            ));
        }
        if self.test_states < n + 1 {
            return Err(invalid("parameters.test_states", format!("must be at least {} (got {})", n + 1, self.test_states)));
        }
        for (i, s) in self.states.iter().enumerate() {
            let field = format!("parameters.states[{i}]");
            if s.len() != n {
                return Err(invalid(field, format!("needs {n} amplitudes (got {})", s.len())));
            }
            if s.iter().flatten().any(|x| !x.is_finite()) {
                return Err(invalid(field, "amplitudes must be finite"));
            }
            let norm: f64 = s.iter().map(|[re, im]| re * re + im * im).sum();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(invalid(field, format!("must be normalized (squared norm {norm})")));
            }
        }
        Ok(())
    }
}
