//! `dnlab`: runs one experiment and writes its reports plus a manifest.
//!
//! Exit codes: 0 all checks passed, 1 configuration or input error,
//! 2 a check failed, 3 the Muskat stepper hit a stability violation.

// negated comparisons deliberately reject NaN; index loops mirror the
// stencil notation
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{Command, ExperimentConfig, Overrides};
use error::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "dnlab",
    version,
    about = "Dirichlet-to-Neumann numerical laboratory"
)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON config, or a manifest from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sweep seed; mandatory for coercivity, convex and lp.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; 1 is the reference mode.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    nz: Option<usize>,
    /// Half-space truncation depth.
    #[arg(long)]
    depth: Option<f64>,
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let base = match &cli.config {
        Some(path) => config::load(path, cli.command)?,
        None => ExperimentConfig::default(),
    };
    let flags = Overrides {
        seed: cli.seed,
        nx: cli.nx,
        nz: cli.nz,
        depth: cli.depth,
    };
    let cfg = base.resolve(cli.command, &flags)?;
    let mut out = output::Outputs::create(&cli.out)?;
    let outcome = commands::run(cli.command, &cfg, &mut out)?;
    out.finish(cli.command, &cfg)?;
    println!(
        "{} [{}]",
        outcome.summary,
        if outcome.pass { "PASS" } else { "FAIL" }
    );
    Ok(outcome.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("dnlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
