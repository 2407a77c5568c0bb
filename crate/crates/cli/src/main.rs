//! `estc`: batch front end for validation, spectral scans, line location,
//! mean values and field maps.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{PrecisionMode, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<estc::Error> for CliError {
    fn from(e: estc::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "estc", version, about = "Dirac electron in electromagnetic space-time crystals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration; defaults describe the reference operating point.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Overrides the configured arithmetic.
    #[arg(long, global = true, value_enum)]
    precision: Option<PrecisionMode>,
    /// Overrides the configured region radius.
    #[arg(long, global = true)]
    radius: Option<u32>,
    /// Worker threads for scans (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Run the analytic, conformance, zero-field and crystal self-checks.
    Validate,
    /// Tabulate R1..R4 over the configured detuning range.
    Scan,
    /// Locate spectral lines and fit their bottoms.
    Minimize,
    /// Mean values at each located line.
    Observe,
    /// Space-time maps of a Hermitian form at each located line.
    Fieldmap,
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(p) = cli.precision {
        cfg.precision = p;
    }
    if let Some(r) = cli.radius {
        cfg.radius = r;
    }
    // Overrides go through the same schema checks as the file.
    RunConfig::parse(&cfg.to_toml())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load(cli)?.resolved();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    std::fs::create_dir_all(&cli.out)?;
    let ctx = commands::Context { cfg, out: cli.out.clone() };
    match cli.command {
        Command::Validate => commands::validate(&ctx),
        Command::Scan => commands::scan(&ctx),
        Command::Minimize => commands::minimize(&ctx),
        Command::Observe => commands::observe(&ctx),
        Command::Fieldmap => commands::fieldmap(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("estc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
