//! `stabens` command line: estimate stability probabilities of matrix
//! ensembles built at sampled model equilibria, sweep epidemiological
//! family sizes, and export plane, locus, spectrum, and density tables as
//! CSV (LF endings, header row, `.` decimal separator).
//!
//! Every output is a pure function of the flags and config file — reruns
//! with the same settings produce byte-identical files. Failures print a
//! single `error: ...` line on stderr and exit nonzero.

mod commands;
mod settings;
mod table;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(
    name = "stabens",
    version,
    about = "Stability probabilities of conditioned random-matrix ensembles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate stability probabilities for the chosen ensemble kinds.
    Run(commands::RunArgs),
    /// Sweep an epidemiological family over its size, summarising each kind.
    Scan(commands::ScanArgs),
    /// Export the toy-model stability plane, product loci, and
    /// bivariate-normal estimates.
    Toy(commands::ToyArgs),
    /// Export eigenvalue spectra, leading-part densities, and pooled
    /// density grids.
    Spectra(commands::SpectraArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => commands::run(args),
        Command::Scan(args) => commands::scan(args),
        Command::Toy(args) => commands::toy(args),
        Command::Spectra(args) => commands::spectra(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
