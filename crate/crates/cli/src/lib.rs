//! Batch front end: experiment configuration, the `norm`, `verify`, `sweep`
//! and `export-curve` verbs, and report files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::{Axis, Context, Exponents, Space};
use crate::config::ExperimentConfig;
pub use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "grandamalgam", version, about = "Grand Lebesgue and grand Wiener amalgam norms on finite intervals")]
pub struct Cli {
    /// Experiment config (JSON); the built-in default when omitted
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Worker threads
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,

    /// Exit with code 3 when a computed norm is +inf
    #[arg(long, global = true)]
    pub require_finite: bool,

    /// Comma-separated claim filter for `verify`, e.g. T3,P1.eq5
    #[arg(long, global = true, value_delimiter = ',', value_name = "LIST")]
    pub claims: Option<Vec<String>>,

    /// Output directory; overrides `out` in the config
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one norm of a named function or sequence
    Norm {
        #[arg(long = "fn", value_name = "NAME")]
        function: String,
        #[arg(long, value_enum)]
        space: Space,
        /// Inner exponent p
        #[arg(long)]
        p: Option<f64>,
        /// Inner weight θ₁
        #[arg(long)]
        theta: Option<f64>,
        /// Outer exponent q
        #[arg(long)]
        q: Option<f64>,
        /// Outer weight θ₂
        #[arg(long)]
        theta2: Option<f64>,
    },
    /// Run the claim suite and write verify.json and verify.csv
    Verify,
    /// Tabulate norms along one axis of the configured grids
    Sweep {
        #[arg(long, value_enum)]
        axis: Axis,
        #[arg(long = "fn", value_name = "NAME")]
        function: Option<String>,
    },
    /// Write the sampled control function of a named function
    ExportCurve {
        #[arg(long = "fn", value_name = "NAME")]
        function: String,
    },
}

/// Runs a parsed command line, printing results to stdout.
pub fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::config("--jobs must be at least 1"));
        }
        // a second call in the same process keeps the first pool
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            log::debug!("thread pool already initialised");
        }
    }
    let config = ExperimentConfig::load(cli.config.as_deref())?;
    let ctx = Context::new(config, cli.out, cli.require_finite);
    match cli.command {
        Command::Norm { function, space, p, theta, q, theta2 } => {
            let rec = commands::norm(&ctx, &function, space, Exponents { p, theta, q, theta2 })?;
            print!("{}", commands::render_norm(&rec));
            commands::require_finite_norm(&ctx, &rec)?;
        }
        Command::Verify => {
            let summary = commands::verify(&ctx, cli.claims)?;
            print!("{}", commands::render_verify(&summary));
            if summary.failed > 0 {
                return Err(CliError::ClaimsFailed(summary.failed));
            }
        }
        Command::Sweep { axis, function } => {
            let rec = commands::sweep(&ctx, axis, function.as_deref())?;
            println!("{} rows written to {}", rec.rows.len(), ctx.out.display());
        }
        Command::ExportCurve { function } => {
            let path = commands::export_curve(&ctx, &function)?;
            println!("{}", path.display());
        }
    }
    Ok(())
}
