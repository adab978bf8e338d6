//! bridgescale: solve, verify, generate, diagnose and probe bridge scaling
//! instances from the command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 no convergence / infeasible /
//! failed verification, 3 validation error, 4 internal numerical failure.
//! stdout carries only the result document; logs go to stderr.

mod commands;
mod output;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Parser)]
#[command(name = "bridgescale", version, about = "Schrödinger bridge scaling toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and print the solution document.
    Solve {
        instance: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        starts: Option<usize>,
        #[arg(long)]
        damping: Option<f64>,
        /// Anderson mixing for the quantum fixed-point iteration.
        #[arg(long)]
        anderson: bool,
        /// Additionally emit the factorization certificate (quantum only).
        #[arg(long)]
        certificate: bool,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Recompute every residual of a stored solution against its instance.
    Verify { solution: PathBuf, instance: PathBuf },
    /// Generate a random instance.
    Gen {
        /// classical | quantum
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: usize,
        /// Number of Kraus operators (quantum).
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Depolarizing mixing weight guaranteeing positivity (quantum).
        #[arg(long, default_value_t = 0.5)]
        positivity: f64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Positivity estimates, contraction coefficients and the convergence
    /// curve of a quantum instance.
    Diagnose {
        instance: PathBuf,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long, default_value_t = 3)]
        refine: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Multi-start fixed-point probing of a quantum instance.
    Probe {
        instance: PathBuf,
        #[arg(long)]
        starts: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{err}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{err}");
                    ExitCode::from(1)
                }
            };
        }
    };

    let outcome = match cli.command {
        Command::Solve {
            instance,
            tol,
            max_iter,
            seed,
            starts,
            damping,
            anderson,
            certificate,
            format,
        } => commands::solve(
            &instance,
            commands::SolveFlags { tol, max_iter, seed, starts, damping, anderson, certificate, format },
        ),
        Command::Verify { solution, instance } => commands::verify(&solution, &instance),
        Command::Gen { kind, n, k, positivity, seed } => commands::gen(&kind, n, k, positivity, seed),
        Command::Diagnose { instance, samples, refine, seed, format } => {
            commands::diagnose(&instance, samples, refine, seed, format)
        }
        Command::Probe { instance, starts, seed } => commands::probe(&instance, starts, seed),
    };

    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error[{}]: {}", failure.code, failure.message);
            ExitCode::from(failure.exit)
        }
    }
}
