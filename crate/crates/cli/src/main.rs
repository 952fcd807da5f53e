//! `syk-lab`: command-line front end for SYK Trotter-error experiments.
//!
//! Every subcommand reads an optional `key = value` configuration file,
//! applies `--set key=value` overrides, validates everything up front and
//! writes its table (with the resolved configuration as a `#` comment block)
//! to `--output` or standard output.
//!
//! Exit status: 0 when every row succeeded and every check passed, 1 when a
//! row or check failed, 2 for invalid configuration or I/O errors.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{error, info};
use syk_trotter::experiment::{self, Command, ExperimentConfig};
use syk_trotter::Result;

#[derive(Parser, Debug)]
#[command(
    name = "syk-lab",
    version,
    about = "Trotter-error experiments on dense and sparse SYK models"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Error ratios observed/bound across system sizes.
    ScanN(Common),
    /// Observed errors and bounds on a log-spaced time grid, with log–log fits.
    ScanT(Common),
    /// Minimal Trotter numbers for target error and failure probability.
    SolveR(Common),
    /// Gate counts of the product formula.
    Gatecount(Common),
    /// Analytical bound values (no simulation).
    Bounds(Common),
    /// Verification suite for the algebra, G_w counts and graph coloring.
    Oracle(Common),
    /// Sample an instance and print it as JSON.
    Gen(Common),
    /// Trotter errors of a single instance.
    Evolve(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Configuration file (TOML `key = value` lines).
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a configuration key; repeatable, e.g. `--set n=6,8 --set l=2`.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output file (standard output when absent).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Worker threads (default: config, then $SYK_LAB_WORKERS, then all cores).
    #[arg(short, long)]
    workers: Option<usize>,
}

impl Cmd {
    fn parts(&self) -> (Command, &Common) {
        match self {
            Cmd::ScanN(c) => (Command::ScanN, c),
            Cmd::ScanT(c) => (Command::ScanT, c),
            Cmd::SolveR(c) => (Command::SolveR, c),
            Cmd::Gatecount(c) => (Command::GateCount, c),
            Cmd::Bounds(c) => (Command::Bounds, c),
            Cmd::Oracle(c) => (Command::Oracle, c),
            Cmd::Gen(c) => (Command::Gen, c),
            Cmd::Evolve(c) => (Command::Evolve, c),
        }
    }
}

/// Text to emit and whether the run fully succeeded.
struct Outcome {
    text: String,
    ok: bool,
}

fn run(command: Command, config: &ExperimentConfig) -> Result<Outcome> {
    let scan = |report: experiment::ScanReport| -> Result<Outcome> {
        Ok(Outcome {
            ok: report.all_ok(),
            text: report.to_csv()?,
        })
    };
    let table = |report: experiment::Report| -> Result<Outcome> {
        Ok(Outcome {
            ok: report.ok,
            text: report.table.to_csv()?,
        })
    };
    match command {
        Command::ScanN => scan(experiment::scan_n(config)?),
        Command::ScanT => scan(experiment::scan_t(config)?),
        Command::Evolve => scan(experiment::evolve(config)?),
        Command::SolveR => table(experiment::solve_r(config)?),
        Command::GateCount => table(experiment::gatecount(config)?),
        Command::Bounds => table(experiment::bounds(config)?),
        Command::Oracle => {
            let report = experiment::run_oracle_suite(config)?;
            Ok(Outcome {
                ok: report.all_passed(),
                text: format!("{}{report}", config.comment_block()),
            })
        }
        Command::Gen => Ok(Outcome {
            ok: true,
            text: experiment::gen(config)?,
        }),
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    let (command, common) = cli.command.parts();
    let mut config = ExperimentConfig::load(common.config.as_deref(), &common.overrides)?;
    if let Some(path) = &common.output {
        config.output = Some(path.display().to_string());
    }
    if common.workers.is_some() {
        config.workers = common.workers;
    }
    config.validate(command)?;
    let workers = match config.workers {
        Some(w) => Some(w),
        None => experiment::workers_from_env()?,
    };
    info!(
        "running {command:?} with {} worker(s)",
        workers.map_or("default".to_string(), |w| w.to_string())
    );
    let outcome = experiment::with_workers(workers, || run(command, &config))??;
    match &config.output {
        Some(path) => std::fs::write(path, &outcome.text)?,
        None => std::io::stdout().write_all(outcome.text.as_bytes())?,
    }
    Ok(outcome.ok)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            error!("some rows or checks failed; see the output");
            ExitCode::from(1)
        }
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
