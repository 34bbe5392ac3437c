//! `bpriv`: private information of a lossy bosonic memory channel.
//!
//! Subcommands: `sweep` (parameter grid to CSV), `optimize` (capacity over
//! the entanglement parameter), `verify` (differential suites, including
//! the Fock-basis oracle), `plot` (CSV to SVG). Exit codes: 0 success,
//! 1 verification failure, 2 usage error.

mod commands;
mod config;
mod csvio;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::UsageError;

#[derive(Parser)]
#[command(name = "bpriv", version, about = "Private information of a lossy bosonic memory channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the private information over a parameter grid and write CSV
    Sweep(SweepArgs),
    /// Maximize the private information over the entanglement parameter r
    Optimize(OptimizeArgs),
    /// Run the differential verification suites
    Verify(VerifyArgs),
    /// Render sweep CSV into SVG curve plots
    Plot(PlotArgs),
}

#[derive(Args)]
pub struct SweepArgs {
    /// Transmissivity values (comma list)
    #[arg(long, value_delimiter = ',')]
    eta: Vec<f64>,
    /// Memory parameter values (comma list)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    s: Vec<f64>,
    /// Photon budgets N_eff (comma list)
    #[arg(long = "n-eff", value_delimiter = ',')]
    n_eff: Vec<f64>,
    /// Lower end of the r grid (defaults to -asinh(sqrt(max N_eff)))
    #[arg(long = "r-min", allow_negative_numbers = true)]
    r_min: Option<f64>,
    /// Upper end of the r grid
    #[arg(long = "r-max", allow_negative_numbers = true)]
    r_max: Option<f64>,
    /// Number of r grid points (inclusive)
    #[arg(long = "r-steps")]
    r_steps: Option<usize>,
    /// Channel uses
    #[arg(long = "n-uses")]
    n_uses: Option<usize>,
    /// Output CSV path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat key=value config file (flags override it)
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    s: Option<f64>,
    #[arg(long = "n-eff")]
    n_eff: Option<f64>,
    #[arg(long = "n-uses")]
    n_uses: Option<usize>,
    /// Optional CSV of the optimizer's evaluation trace
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Random tuples per differential suite
    #[arg(long)]
    tuples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also compare against the truncated Fock-basis oracle
    #[arg(long)]
    oracle: bool,
    /// Fock cutoff per mode (oracle)
    #[arg(long)]
    d: Option<usize>,
    /// Gauss-Hermite order per displacement dimension (oracle)
    #[arg(long)]
    quad: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    s: Option<f64>,
    #[arg(long = "n-eff")]
    n_eff: Option<f64>,
    /// Check the n-use pipeline (n > 2 adds the equal-per-use report)
    #[arg(long = "n-uses")]
    n_uses: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
pub struct PlotArgs {
    /// Sweep CSV produced by `bpriv sweep`
    csv: PathBuf,
    /// Output SVG path (suffixed per (eta, N_eff) group when several exist)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Sweep(args) => commands::cmd_sweep(args).map(|()| true),
        Command::Optimize(args) => commands::cmd_optimize(args).map(|()| true),
        Command::Verify(args) => commands::cmd_verify(args),
        Command::Plot(args) => commands::cmd_plot(args).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            if err.downcast_ref::<UsageError>().is_some() {
                eprintln!("error: {err}");
                ExitCode::from(2)
            } else {
                eprintln!("error: {err:#}");
                ExitCode::from(1)
            }
        }
    }
}
