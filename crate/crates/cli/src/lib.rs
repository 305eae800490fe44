//! Batch front end for the RDI QSDC simulator and capacity engine.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

pub use config::{RunConfig, TableFormat};

/// Environment variable naming the default configuration file.
pub const CONFIG_ENV: &str = "RDI_QSDC_CONFIG";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0} verification check(s) failed")]
    Verification(usize),
    #[error(transparent)]
    Core(#[from] qsdc_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Verification(_) => 3,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rdi-qsdc", version, about = "RDI QSDC simulator and secrecy-capacity toolkit")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides `protocol.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Table format; overrides `output.format`.
    #[arg(long, global = true, value_enum)]
    pub format: Option<TableFormat>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Run the six-step protocol and write the transcript and summary.
    Simulate,
    /// Tabulate capacity along one axis for each configured P1.
    Sweep,
    /// Efficiency, distance, noise and fidelity thresholds per P1.
    Threshold,
    /// Predicted and simulated check statistics over a (p1, p2) attack grid.
    AttackScan,
    /// Run the acceptance battery; exit code 3 on any failure.
    Verify {
        /// Smaller Monte Carlo samples.
        #[arg(long)]
        quick: bool,
    },
}

/// Loads the configuration and applies flag overrides.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.protocol.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    if let Some(format) = cli.format {
        cfg.output.format = format;
    }
    Ok(cfg)
}

/// Runs one command inside a dedicated worker pool. Output does not depend
/// on the number of workers.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = resolve_config(cli)?;
    if cli.workers == Some(0) {
        return Err(CliError::Config("--workers must be at least 1".into()));
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Config(format!("cannot start workers: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Simulate => commands::simulate(&cfg),
        Command::Sweep => commands::sweep(&cfg),
        Command::Threshold => commands::threshold(&cfg),
        Command::AttackScan => commands::attack_scan(&cfg),
        Command::Verify { quick } => commands::verify(&cfg, *quick),
    })
}

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
