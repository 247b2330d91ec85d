//! `rsf` — scenario runner for the moment-dynamics library.
//!
//! Subcommands: `simulate` (thermodynamic time series to CSV),
//! `sweep-entropy` (steady-state entropy over a β × ω grid),
//! `steady` (closed-form steady state of a thermal scenario),
//! `oracle-compare` (moment equations vs the brute-force truncated
//! number-basis master equation).
//!
//! Exit codes: 0 success (for `oracle-compare`: comparison passed),
//! 1 oracle comparison failed, 2 configuration or domain error,
//! 3 numerical failure during a well-posed computation. Diagnostics go
//! to stderr; data go to the requested output files; `steady` and
//! `oracle-compare` print their reports to stdout.

mod commands;
mod config;
mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

/// A configuration or input problem; maps to exit code 2.
/// Numerical failures of well-posed runs map to exit code 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl From<rsf_core::Error> for CliError {
    fn from(e: rsf_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

#[derive(Parser)]
#[command(
    name = "rsf",
    version,
    about = "Moment-level dynamics and thermodynamics of multimode bosonic fields \
             under drive, damping, and random scattering"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configured scenario and write a thermodynamic time
    /// series as CSV.
    Simulate {
        /// Scenario description (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        output: PathBuf,
        /// Append the flattened second moments and coherence vector to
        /// every row.
        #[arg(long)]
        dump_state: bool,
    },
    /// Tabulate steady-state entropy of a damped mode over a β × ω grid.
    SweepEntropy {
        /// Smallest inverse temperature (> 0).
        #[arg(long)]
        beta_min: f64,
        /// Largest inverse temperature.
        #[arg(long)]
        beta_max: f64,
        /// Number of evenly spaced grid points (≥ 2).
        #[arg(long)]
        steps: usize,
        /// Mode frequencies, comma separated; columns are sorted
        /// ascending.
        #[arg(long, value_delimiter = ',', required = true)]
        omega: Vec<f64>,
        /// Output CSV path.
        #[arg(long)]
        output: PathBuf,
    },
    /// Print the closed-form steady state of a thermal scenario.
    Steady {
        /// Scenario description (TOML); must declare scenario = "thermal".
        #[arg(long)]
        config: PathBuf,
    },
    /// Integrate the moment equations against the brute-force truncated
    /// number-basis master equation and report the deviation.
    OracleCompare {
        /// Scenario description (TOML) with an [oracle] section.
        #[arg(long)]
        config: PathBuf,
    },
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Simulate {
            config,
            output,
            dump_state,
        } => commands::run_simulate(&config, &output, dump_state),
        Command::SweepEntropy {
            beta_min,
            beta_max,
            steps,
            omega,
            output,
        } => commands::run_sweep_entropy(beta_min, beta_max, steps, omega, &output),
        Command::Steady { config } => commands::run_steady(&config),
        Command::OracleCompare { config } => commands::run_oracle_compare(&config),
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("error: {msg}");
            3
        }
    };
    std::process::exit(code);
}
