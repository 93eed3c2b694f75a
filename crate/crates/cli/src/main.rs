//! Batch front end for the PRS-TDOA simulator.
//!
//! Subcommands mirror the experiment workflow: `validate` a scenario file,
//! `calibrate` the inter-gNB offsets, `locate` the test positions with a
//! calibration file, `sweep` a study parameter, or `simulate` the whole
//! session and emit the full CSV bundle.
//!
//! Exit codes: 0 success, 1 domain or validation failure, 2 I/O failure.
//! Set `TDOA_LOG` (error, warn, info, debug, trace) for log verbosity.

mod commands;
mod output;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "prs-tdoa", version, about = "5G downlink-PRS TDOA positioning simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Scenario config file (TOML, SI units).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a scenario file against every config invariant.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the calibration campaign and write calibration.csv.
    Calibrate {
        #[command(flatten)]
        common: CommonArgs,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the test positions using a calibration file; writes
    /// estimates.csv and hyperbolas.csv.
    Locate {
        #[command(flatten)]
        common: CommonArgs,
        /// calibration.csv from a previous `calibrate` run.
        #[arg(long)]
        calibration: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also render plot.svg with hyperbolas and estimates.
        #[arg(long)]
        svg: bool,
    },
    /// Sweep a study parameter; writes sweep.csv.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// PARAM=START:STOP:N with PARAM one of excess_delay, snr_db,
        /// oversample_factor.
        #[arg(long)]
        sweep: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the full session and write the complete CSV bundle.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        out: PathBuf,
        /// Also render plot.svg.
        #[arg(long)]
        svg: bool,
        /// Also dump per-gNB channel diagnostics (cfr.csv, cir.csv).
        #[arg(long)]
        dump_channel: bool,
    },
}

/// Failures sorted by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Domain or validation failure: exit 1.
    Domain(String),
    /// I/O failure: exit 2.
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Domain(msg) => write!(f, "{msg}"),
            CliError::Io(msg) => write!(f, "{msg}"),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("TDOA_LOG")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { common } => commands::validate(&common.config, common.seed),
        Command::Calibrate { common, out } => {
            commands::calibrate(&common.config, common.seed, &out)
        }
        Command::Locate {
            common,
            calibration,
            out,
            svg,
        } => commands::locate(&common.config, common.seed, &calibration, &out, svg),
        Command::Sweep { common, sweep, out } => {
            commands::sweep(&common.config, common.seed, &sweep, &out)
        }
        Command::Simulate {
            common,
            out,
            svg,
            dump_channel,
        } => commands::simulate(&common.config, common.seed, &out, svg, dump_channel),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
