//! Front end of the `vpt` binary: argument types, dispatch and output tables.

pub mod commands;
pub mod error;
pub mod table;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

pub use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "vpt", version, about = "Variational effective potential of hydrogen in a magnetic field")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GlobalArgs {
    /// Worker threads; VPT_JOBS overrides. 1 runs the serial, warm-started path.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Convert energies to eV, fields to tesla and β to kelvin.
    #[arg(long, global = true)]
    pub si: bool,
    /// Exit with status 0 even if some points did not converge.
    #[arg(long, global = true)]
    pub allow_partial: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file (stdout when absent).
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Optimizer starting points per evaluation.
    #[arg(long, global = true, default_value_t = 4)]
    pub multistart: usize,
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol_grad: f64,
    #[arg(long, global = true, default_value_t = 200)]
    pub max_iter: usize,
    /// Add a per-record wall-time column (outputs then differ run to run).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisArg {
    #[value(name = "t", alias = "transverse")]
    T,
    #[value(name = "l", alias = "longitudinal")]
    L,
    Both,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Optimized W1 along the transverse and/or longitudinal axis.
    Potential {
        #[arg(long)]
        beta: f64,
        #[arg(long = "B", value_delimiter = ',', required = true, num_args = 1..)]
        #[serde(rename = "B")]
        b: Vec<f64>,
        #[arg(long, value_enum, default_value_t = AxisArg::Both)]
        axis: AxisArg,
        #[arg(long, default_value_t = 0.0)]
        rmin: f64,
        #[arg(long, default_value_t = 8.0)]
        rmax: f64,
        #[arg(long, default_value_t = 161)]
        points: usize,
    },
    /// Zero-temperature binding energy over a field grid or list.
    Binding {
        #[arg(long = "Bmin", default_value_t = 0.01)]
        #[serde(rename = "Bmin")]
        b_min: f64,
        #[arg(long = "Bmax", default_value_t = 1e5)]
        #[serde(rename = "Bmax")]
        b_max: f64,
        #[arg(long, default_value_t = 36)]
        points: usize,
        /// Logarithmic spacing.
        #[arg(long)]
        log: bool,
        /// Explicit field values; replaces the grid.
        #[arg(long = "B", value_delimiter = ',', num_args = 1..)]
        #[serde(rename = "B")]
        b: Option<Vec<f64>>,
    },
    /// Weak-field series coefficients up to the given order.
    WeakField {
        #[arg(long, default_value_t = 6)]
        order: usize,
    },
    /// Strong-field expansion terms next to the variational optimum.
    StrongField {
        #[arg(long = "B", value_delimiter = ',', required = true, num_args = 1..)]
        #[serde(rename = "B")]
        b: Vec<f64>,
    },
    /// Closed-form results for the electron without the Coulomb term.
    ExactField {
        #[arg(long)]
        beta: f64,
        #[arg(long = "B")]
        #[serde(rename = "B")]
        b: f64,
    },
    /// Run the acceptance criteria.
    Verify {
        /// Criterion number, group or name.
        #[arg(long)]
        only: Option<String>,
        #[arg(long)]
        json: bool,
    },
}

fn effective_jobs(flag: usize) -> Result<usize, CliError> {
    let jobs = match std::env::var("VPT_JOBS") {
        Ok(v) if !v.trim().is_empty() => {
            v.trim().parse().map_err(|_| CliError::Usage(format!("VPT_JOBS must be a positive integer, got {v:?}")))?
        }
        _ => flag,
    };
    if jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    Ok(jobs)
}

/// Parses the process arguments and runs the selected subcommand.
pub fn main_entry() -> ExitCode {
    let mut cli = Cli::parse();
    let result = effective_jobs(cli.global.jobs).and_then(|j| {
        cli.global.jobs = j;
        commands::run(&cli.command, &cli.global)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("vpt: {e}");
            ExitCode::from(2)
        }
    }
}
