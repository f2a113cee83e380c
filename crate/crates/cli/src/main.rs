//! Command-line driver for the quasiradial-profile toolkit.
//!
//! Subcommands run the library pipelines against a JSON run configuration
//! and write CSV/JSON artifacts to the output directory. Exit codes:
//! `0` when every check passes, `1` on a check failure, `2` on a usage
//! error (bad flags, malformed or invalid configuration, unwritable
//! output). Identical invocations produce byte-identical artifacts.

mod artifacts;
mod config;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Why a run did not exit 0: a usage problem (exit 2) or a failed
/// scientific check / solver failure (exit 1).
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Check(String),
}

impl From<plap_core::Error> for Failure {
    fn from(e: plap_core::Error) -> Self {
        Failure::Check(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "plap",
    version,
    about = "Quasiradial profile, linearized coefficient field, verification, \
             and singular oblique solve pipelines"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// JSON run configuration; defaults to the built-in {"p": 4, "N": 3}
    #[arg(long, global = true, value_name = "path")]
    config: Option<PathBuf>,
    /// Artifact directory; overrides the configuration's output_dir
    #[arg(long, global = true, value_name = "dir")]
    out: Option<PathBuf>,
    /// Seed for the random spot-check points
    #[arg(long, global = true, value_name = "u64", default_value_t = 2024)]
    seed: u64,
}

#[derive(Clone, Copy, Subcommand)]
pub enum Cmd {
    /// Integrate the angular profile and certify it against its closed form
    Profile,
    /// Sample boundary coefficients and spot-check the eigenstructure
    Coeffs,
    /// Run exact algebra, sign, energy, coercivity and kernel checks
    Verify,
    /// Solve the singular oblique problem and measure its mean-value gap
    Solve,
    /// Run every pipeline and aggregate a single run report
    ReportAll,
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let cfg = match &cli.config {
        Some(path) => config::parse_config_file(path).map_err(Failure::Usage)?,
        None => config::default_config(),
    };
    let out = cli.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    let ctx = pipeline::Ctx {
        cfg: &cfg,
        seed: cli.seed,
        out: &out,
    };
    artifacts::write_artifact(&out, "config.json", &cfg.normalized())?;
    let outcome = pipeline::dispatch(&ctx, cli.command)?;
    for (name, pass) in &outcome.checks {
        println!("{name}: {}", if *pass { "pass" } else { "FAIL" });
    }
    println!("artifacts: {}", out.display());
    if outcome.pass() {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "failed checks: {}",
            outcome.failing().join(", ")
        )))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failure: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
