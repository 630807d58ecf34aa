//! Command-line front end for the experiment lab.
//!
//! Exit codes: 0 success, 2 configuration/validation problems, 3 numeric
//! failures (CFL, underflow, non-convergence), 4 missing or partial
//! results. Every failure prints a one-line diagnostic to stderr.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use lyapnorm::error::{Error, Result};
use lyapnorm::lab::{self, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(
    name = "lyapnorm",
    version,
    about = "Lyapunov exponents of compact linear cocycles across Sobolev norms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config file.
    Run {
        /// Path to the experiment config.
        config: PathBuf,
    },
    /// Aggregate a finished run directory, evaluate its acceptance
    /// assertions, and write report.json.
    Report {
        /// Run directory containing manifest.json.
        dir: PathBuf,
    },
    /// Run and report an estimates-verify experiment (commutator and
    /// lower-order refinement stability). The config kind is enforced.
    VerifyEstimates {
        /// Path to an estimates-verify config.
        config: PathBuf,
    },
    /// Run and report a matrix-oracle experiment (exactly solvable
    /// finite models). The config kind is enforced.
    MatrixOracle {
        /// Path to a matrix-oracle config.
        config: PathBuf,
    },
}

fn run_enforced_kind(path: &PathBuf, want: ExperimentKind) -> Result<()> {
    let cfg = ExperimentConfig::load(path)?;
    if cfg.kind != want {
        return Err(Error::Config(format!(
            "this subcommand requires kind = \"{}\", but the config declares \"{}\"",
            want.as_str(),
            cfg.kind.as_str()
        )));
    }
    lab::run_config(&cfg)?;
    let rep = lab::report(&cfg.output_dir)?;
    print!("{}", rep.render());
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config } => {
            let summary = lab::run(&config)?;
            println!(
                "wrote {}: {} result rows, {} long rows, {} seeds in {:.2}s",
                summary.output_dir.display(),
                summary.result_rows,
                summary.long_rows,
                summary.seeds,
                summary.wall_seconds
            );
        }
        Command::Report { dir } => {
            let rep = lab::report(&dir)?;
            print!("{}", rep.render());
        }
        Command::VerifyEstimates { config } => {
            run_enforced_kind(&config, ExperimentKind::EstimatesVerify)?;
        }
        Command::MatrixOracle { config } => {
            run_enforced_kind(&config, ExperimentKind::MatrixOracle)?;
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = execute(cli) {
        eprintln!("lyapnorm: {err}");
        std::process::exit(err.exit_code());
    }
}
