//! Command-line driver: JSON run configurations in, JSON/CSV reports and
//! Netpbm snapshots out.

pub mod commands;
pub mod config;
pub mod render;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use commands::{execute, Output};
pub use config::RunConfig;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    /// Bad or inconsistent configuration; nothing was computed.
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn config(e: impl std::fmt::Display) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn runtime(e: impl std::fmt::Display) -> Self {
        CliError::Runtime(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "isinglab", version, about = "Ising and Potts lattice models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, env = "ISINGLAB_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Exact enumeration report (JSON).
    Enumerate,
    /// Monte Carlo estimates at one temperature (CSV).
    Sample,
    /// Monte Carlo estimates over a temperature list (CSV).
    Sweep,
    /// Closed-form spontaneous magnetization table (CSV).
    Onsager,
    /// Cumulant and temperature-expansion checks (JSON).
    SeriesCheck,
    /// Interface-area census by enumeration (JSON).
    Census,
    /// Snapshot image (PGM/PPM).
    Render,
}

fn load_config(command: Command, path: Option<&Path>) -> Result<Option<RunConfig>, CliError> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            RunConfig::from_json(&text).map(Some)
        }
        None if command == Command::Onsager => Ok(None),
        None => Err(CliError::Config("--config is required".into())),
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Runs one invocation and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match try_run(cli) {
        Ok(ok) => {
            if ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("isinglab: {e}");
            e.exit_code()
        }
    }
}

fn try_run(cli: &Cli) -> Result<bool, CliError> {
    let config = load_config(cli.command, cli.config.as_deref())?;
    let output = match cli.threads {
        Some(0) => return Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(CliError::runtime)?
            .install(|| execute(cli.command, config.as_ref(), cli.seed))?,
        None => execute(cli.command, config.as_ref(), cli.seed)?,
    };
    match &cli.out {
        Some(path) => write_atomic(path, &output.bytes)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?,
        None => std::io::stdout().write_all(&output.bytes).map_err(CliError::runtime)?,
    }
    for line in &output.messages {
        eprintln!("{line}");
    }
    Ok(output.ok)
}
