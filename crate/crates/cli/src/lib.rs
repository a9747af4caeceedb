//! Command-line front end for the caustica library: evaluates fields on grids, compares
//! representations, runs h-sweeps, index computations and invariant checks.

pub mod commands;
pub mod config;
pub mod field;

use std::path::Path;

use thiserror::Error;

pub use commands::Outcome;
pub use config::JobConfig;
pub use field::{read_csv, WaveField};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    /// 1 for a numerical contract failure, 2 for configuration and file problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Eval,
    Compare,
    Sweep,
    Index,
    Check,
    Bridge,
}

/// Parses "0.1,0.05" into a list of step sizes.
pub fn parse_h_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(|v| v.trim().parse::<f64>().map_err(|e| CliError::Config(format!("bad h value '{v}': {e}")))).collect()
}

/// Runs one command on a validated config, writing its files into `out`.
pub fn run(command: Command, cfg: &JobConfig, out: &Path, threads: Option<usize>) -> Result<Outcome, CliError> {
    cfg.validate()?;
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("cannot create {}: {e}", out.display())))?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match command {
        Command::Eval => commands::cmd_eval(cfg, out),
        Command::Compare => commands::cmd_compare(cfg, out),
        Command::Sweep => commands::cmd_sweep(cfg, out),
        Command::Index => commands::cmd_index(cfg, out),
        Command::Check => commands::cmd_check(cfg, out),
        Command::Bridge => commands::cmd_bridge(cfg, out),
    })
}
