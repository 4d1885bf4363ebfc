//! `triplex` command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod manifest;
mod plot;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Status;
use crate::config::Config;
use crate::manifest::ManifestWriter;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or invalid configuration.
    Config(String),
    /// Failure while computing or writing outputs.
    Run(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Run(m) => write!(f, "error: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "triplex", version, about = "Sup-norm concentration bounds and Monte-Carlo checks for high-dimensional time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a sample path (and its filtered version) as CSV.
    Simulate(Common),
    /// Evaluate named bounds over an x grid.
    Bounds(Common),
    /// Run the algebraic identity checks; exits 1 on any failure.
    Verify(Common),
    /// Estimate a tail curve, compare it with bounds and plot it.
    Experiment(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config, or a manifest from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "TRIPLEX_OUT_DIR", default_value = "triplex-out")]
    out: PathBuf,
    /// Base seed; overrides `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; overrides `run.threads`.
    #[arg(long)]
    threads: Option<usize>,
}

type Handler = fn(&Config, &std::path::Path, ManifestWriter<'_>) -> Result<Status, CliError>;

fn run(cli: Cli) -> Result<Status, CliError> {
    let (name, args, cmd): (&'static str, Common, Handler) =
        match cli.command {
            Command::Simulate(a) => ("simulate", a, commands::simulate),
            Command::Bounds(a) => ("bounds", a, commands::bounds),
            Command::Verify(a) => ("verify", a, commands::verify),
            Command::Experiment(a) => ("experiment", a, commands::experiment),
        };
    let mut cfg = match &args.config {
        Some(path) => {
            let mut c = config::load(path)?;
            c.rebase(path.parent().unwrap_or(std::path::Path::new(".")));
            c
        }
        None => Config::default(),
    };
    if let Some(s) = args.seed {
        cfg.run.seed = s;
    }
    if let Some(t) = args.threads {
        if t == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        cfg.run.threads = Some(t);
    }
    fs::create_dir_all(&args.out).map_err(|e| CliError::Run(format!("{}: {e}", args.out.display())))?;
    let writer = ManifestWriter { command: name, config_path: args.config.as_deref(), config: &cfg, out: &args.out };
    cmd(&cfg, &args.out, writer)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
