//! Config-driven runner for the rdsim experiments.
//!
//! [`run`] turns a validated [`ExperimentConfig`] into a [`Report`];
//! [`verify::verify_all`] runs the acceptance suite. The `rdsim` binary is a
//! thin wrapper that picks the output format and maps outcomes to exit codes.

pub mod config;
pub mod experiments;
pub mod report;
pub mod verify;

use std::time::Instant;

use thiserror::Error;

pub use config::{ExperimentConfig, Format, Kind, Parameters};
pub use report::{Check, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("run failed: {0}")]
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation { .. } => EXIT_INVALID,
            Self::Io(_) | Self::Run(_) => EXIT_OTHER,
        }
    }
}

/// Runs one experiment. `workers` only changes speed, never results.
pub fn run(config: &ExperimentConfig, workers: usize) -> Result<Report, CliError> {
    let started = Instant::now();
    let inputs = config.to_json_value();
    let kind = config.kind.name();
    match &config.parameters {
        Parameters::Pendulum(p) => {
            let (results, checks) = experiments::run_pendulum(p, config.seed, workers)?;
            Ok(Report::new(kind, inputs, results, checks, started))
        }
        Parameters::Spinchain(p) => {
            let (results, checks) = experiments::run_spinchain(p, config.seed)?;
            Ok(Report::new(kind, inputs, results, checks, started))
        }
        Parameters::Born(p) => {
            let (results, checks) = experiments::run_born(p, config.seed)?;
            Ok(Report::new(kind, inputs, results, checks, started))
        }
    }
}

/// Exit code for a finished report.
pub fn report_exit_code(report: &Report) -> i32 {
    if report.pass {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}
