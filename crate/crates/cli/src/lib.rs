//! Command-line front end for the `nahn_core` analyses.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::Parser;

pub use config::{Command, Format, Overrides, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(nahn_core::Error),
    #[error("singular network{}: condition number {condition:.3e}", omega.map(|w| format!(" at omega = {w} rad/s")).unwrap_or_default())]
    Singular { omega: Option<f64>, condition: f64 },
    #[error("{0}")]
    Output(String),
}

impl From<nahn_core::Error> for CliError {
    fn from(e: nahn_core::Error) -> Self {
        match e {
            nahn_core::Error::Validation { key, reason } => CliError::Config(format!("key `{key}`: {reason}")),
            nahn_core::Error::SingularNetwork { condition } => CliError::Singular { omega: None, condition },
            other => CliError::Numerical(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Singular { .. } => 4,
            CliError::Output(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "nahn",
    version,
    about = "Spectral topology and skin effect of non-Abelian Hatano-Nelson chains"
)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Flat key-value file (TOML syntax) or a flat JSON object (`.json`).
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for sweeps and Monte Carlo; all cores by default.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub kpoints: Option<usize>,
    #[arg(long = "ep-tol")]
    pub ep_tol: Option<f64>,
}

impl Cli {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            format: self.format,
            seed: self.seed,
            kpoints: self.kpoints,
            ep_tol: self.ep_tol,
        }
    }
}

/// Loads the config and runs the command; returns the files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let cfg = RunConfig::load(&cli.config, cli.command, &cli.overrides())?;
    match cli.threads {
        None => commands::execute(&cfg),
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Output(format!("cannot start thread pool: {e}")))?
            .install(|| commands::execute(&cfg)),
    }
}
