use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rdsim_cli::config::{ExperimentConfig, Format, Kind, Parameters};
use rdsim_cli::report::{write_output, Report};
use rdsim_cli::{report_exit_code, run, verify, CliError};

#[derive(Parser)]
#[command(name = "rdsim", version, about = "Randomizing-device experiments and their acceptance suite")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pendulum near its separatrix: outcome probabilities and Monte Carlo trials
    Pendulum {
        #[command(flatten)]
        common: RunArgs,
        /// Integrate each trial instead of using the energy criterion
        #[arg(long)]
        dynamics: bool,
    },
    /// Heisenberg chain symmetries, ground space and field sensitivity
    Spinchain {
        #[command(flatten)]
        common: RunArgs,
    },
    /// Outcome counting on the tipping model
    Born {
        #[command(flatten)]
        common: RunArgs,
    },
    /// Run the full acceptance suite
    VerifyAll {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
    /// Worker threads for trial loops; results do not depend on it
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct OutputArgs {
    /// Report destination; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Flag, then config, then file extension, then JSON.
fn pick_format(flag: Option<Format>, config: Option<Format>, path: Option<&Path>) -> Format {
    flag.or(config)
        .or_else(|| match path?.extension()?.to_str()? {
            "csv" => Some(Format::Csv),
            _ => None,
        })
        .unwrap_or(Format::Json)
}

fn emit(report: &Report, format: Format, path: Option<&Path>) -> Result<i32, CliError> {
    write_output(&report.render(format)?, path)?;
    for c in report.failed_checks() {
        eprintln!("check failed: {} ({})", c.name, c.detail);
    }
    eprintln!(
        "{}: {}/{} checks passed",
        report.kind,
        report.checks.iter().filter(|c| c.pass).count(),
        report.checks.len()
    );
    Ok(report_exit_code(report))
}

fn run_experiment(kind: Kind, args: RunArgs, dynamics: bool) -> Result<i32, CliError> {
    let mut config = ExperimentConfig::load(&args.config, args.seed)?;
    if config.kind != kind {
        return Err(CliError::Validation {
            field: "kind".into(),
            message: format!("config is for '{}', not '{}'", config.kind.name(), kind.name()),
        });
    }
    if dynamics {
        if let Parameters::Pendulum(p) = &mut config.parameters {
            p.mode = rdsim::pendulum::ClassificationMode::Dynamics;
        }
    }
    let out_cfg = config.output.clone().unwrap_or(rdsim_cli::config::OutputSpec { path: None, format: None });
    let path = args.output.out.or(out_cfg.path);
    let format = pick_format(args.output.format, out_cfg.format, path.as_deref());
    let report = run(&config, args.workers.unwrap_or_else(default_workers))?;
    emit(&report, format, path.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Pendulum { common, dynamics } => run_experiment(Kind::Pendulum, common, dynamics),
        Command::Spinchain { common } => run_experiment(Kind::Spinchain, common, false),
        Command::Born { common } => run_experiment(Kind::Born, common, false),
        Command::VerifyAll { seed, output, workers } => {
            verify::verify_all(seed, workers.unwrap_or_else(default_workers)).and_then(|report| {
                let format = pick_format(output.format, None, output.out.as_deref());
                emit(&report, format, output.out.as_deref())
            })
        }
    };
    let code = outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
