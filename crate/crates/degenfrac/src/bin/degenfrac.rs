//! Command-line front end for the solver library.

use clap::{Parser, Subcommand};
use degenfrac::driver::{self, AppError};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "degenfrac",
    version,
    about = "Eigenfunction-expansion solver for degenerate diffusion with a fractional time derivative"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured problem and write field, spectrum, mode, and
    /// diagnostic files next to the output prefix
    Solve {
        /// JSON run configuration
        config: PathBuf,
    },
    /// Print the low eigenvalues of the configured spatial operator
    Eigs {
        /// JSON run configuration
        config: PathBuf,
        /// Override the number of modes from the configuration
        #[arg(long)]
        modes: Option<usize>,
    },
    /// Evaluate the scalar relaxation function E_{alpha,m,l}(z)
    Ks {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        m: f64,
        #[arg(long, default_value_t = 0.0)]
        l: f64,
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
    },
    /// Run independent cross-checks on the configured problem and write a
    /// verification report
    Verify {
        /// JSON run configuration
        config: PathBuf,
    },
    /// Run built-in diagnostics against frozen reference values
    Selftest,
}

fn run(command: Command) -> Result<(), AppError> {
    match command {
        Command::Solve { config } => {
            let summary = driver::run_solve(&config)?;
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "modes: computed {}, used {}",
                summary.modes_computed, summary.modes_used
            );
            println!(
                "truncation bound: {:.3e} (tolerance {:.3e})",
                summary.truncation_bound, summary.tolerance
            );
            println!(
                "equation residual: max {:.3e} relative, rms {:.3e}",
                summary.residual.max_rel, summary.residual.rms_rel
            );
            for f in &summary.files {
                println!("wrote {f}");
            }
            Ok(())
        }
        Command::Eigs { config, modes } => {
            let summary = driver::run_eigs(&config, modes)?;
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            println!("n,lambda,near_degenerate");
            for (i, (lam, flag)) in summary
                .eigenvalues
                .iter()
                .zip(&summary.near_degenerate)
                .enumerate()
            {
                println!("{},{lam},{flag}", i + 1);
            }
            Ok(())
        }
        Command::Ks { alpha, m, l, z } => {
            let value = driver::run_ks(alpha, m, l, z)?;
            println!("{value:.9e}");
            Ok(())
        }
        Command::Verify { config } => {
            let report = driver::run_verify(&config)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for c in &report.checks {
                println!(
                    "{}: {} (value {:.3e}, threshold {:.3e})",
                    c.name,
                    if c.passed { "pass" } else { "FAIL" },
                    c.value,
                    c.threshold
                );
            }
            match report.first_failure() {
                None => Ok(()),
                Some(first) => Err(AppError::Numeric(format!(
                    "verification failed at check '{}': value {:.6e} exceeds {:.6e}",
                    first.name, first.value, first.threshold
                ))),
            }
        }
        Command::Selftest => {
            for line in driver::run_selftest()? {
                println!("{line}");
            }
            println!("selftest passed");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
