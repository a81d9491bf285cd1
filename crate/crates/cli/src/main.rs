//! `minkowski`: tube volumes, dimension fits and embedding checks from a
//! TOML experiment configuration.
//!
//! Exit codes: 0 pass, 1 operational error, 2 failed check.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use commands::Ctx;
use config::ExperimentConfig;
use output::Sink;

#[derive(Parser, Debug)]
#[command(name = "minkowski", version, about)]
struct Cli {
    /// Experiment configuration (TOML). Defaults to the built-in library.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the invariance and self-test tolerances.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output directory for JSON reports and CSV traces.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Box dimension in R^N and after the lift to R^{N+1}.
    Dim {
        #[arg(long)]
        set: String,
    },
    /// Window estimate of the s-dimensional contents.
    Content {
        #[arg(long)]
        set: String,
        /// Defaults to the fitted dimension.
        #[arg(long = "s")]
        s: Option<f64>,
    },
    /// Normalized contents before and after the embedding.
    Invariance {
        #[arg(long)]
        set: String,
        #[arg(long = "s")]
        s: Option<f64>,
    },
    /// Ordering chain of the normalized contents and the crude constants.
    Sandwich {
        #[arg(long)]
        set: String,
        #[arg(long = "s")]
        s: Option<f64>,
    },
    /// Product inequality for two sets given as `--set A --set B`.
    Product {
        #[arg(long = "set", required = true)]
        sets: Vec<String>,
        #[arg(long = "s")]
        s: Option<f64>,
        /// Exponent of the second factor.
        #[arg(long = "r")]
        r: Option<f64>,
    },
    /// Extremal γ ratio across a family of sets.
    Extremality {
        #[arg(long = "set")]
        sets: Vec<String>,
        #[arg(long = "s")]
        s: Option<f64>,
    },
    /// Quadrature, γ table, product identity and backend checks.
    Selftest,
}

fn run(cli: Cli) -> Result<bool> {
    let mut config = ExperimentConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(tol) = cli.tol {
        config.tolerances.invariance = tol;
        config.tolerances.selftest = tol;
    }
    if let Some(out) = cli.out {
        config.output.dir = out;
    }
    config.validate()?;
    let sink = Sink::new(&config.output.dir)?;
    let ctx = Ctx { config, sink };
    match &cli.command {
        Command::Dim { set } => commands::dim(&ctx, set),
        Command::Content { set, s } => commands::content(&ctx, set, *s),
        Command::Invariance { set, s } => commands::invariance(&ctx, set, *s),
        Command::Sandwich { set, s } => commands::sandwich(&ctx, set, *s),
        Command::Product { sets, s, r } => commands::product(&ctx, sets, *s, *r),
        Command::Extremality { sets, s } => commands::extremality(&ctx, sets, *s),
        Command::Selftest => commands::selftest(&ctx),
    }
}

fn main() -> ExitCode {
    // Usage errors are operational errors, not failed checks.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
