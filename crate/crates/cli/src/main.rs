//! `fermicorr`: correlation functions, determinant inequalities and
//! detection sampling for chaotic electron beams.
//!
//! Exit codes: 0 success, 1 an inequality was violated, 2 invalid
//! configuration, 3 i/o failure, 4 the detector grid cannot be sampled.

mod commands;
mod error;
mod inputs;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Outcome;

#[derive(Parser, Debug)]
#[command(name = "fermicorr", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normalized pair correlation 1 - |gamma(tau)|^2 as CSV.
    Curve(commands::CurveArgs),
    /// Check one partition inequality (default: the product bound).
    Check(commands::CheckArgs),
    /// Check every set partition of up to 10 points.
    Sweep(commands::SweepArgs),
    /// Sample detection records on a time grid and histogram coincidences.
    Sample(commands::SampleArgs),
    /// Coherence time h / dE for an energy bandwidth.
    CoherenceTime(commands::CoherenceTimeArgs),
    /// Block-unitary cross-check of a two-block split.
    Crosscheck(commands::CrosscheckArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Curve(args) => commands::curve(args),
        Command::Check(args) => commands::check(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Sample(args) => commands::sample(args),
        Command::CoherenceTime(args) => commands::coherence_time(args),
        Command::Crosscheck(args) => commands::crosscheck(args),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Violated) => ExitCode::from(1),
        Err(err) => {
            eprintln!("fermicorr: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
