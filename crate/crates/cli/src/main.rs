//! `fracreg`: synthetic data, registration runs, warping and the numerical
//! check suite for fractional-order DTI registration.
//!
//! Exit codes: 0 ok, 2 config error, 3 data error, 4 verification failure,
//! 5 numerical failure.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fracreg::fraccalc::Side;
use fracreg::ErrorKind;

#[derive(Debug, Parser)]
#[command(name = "fracreg", version, about = "Fractional-order variational DTI registration")]
pub struct Cli {
    /// JSON run configuration; unknown keys are rejected.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Fractional order, overrides the config.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub side: Option<Side>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a template, its warp by a random basis velocity, and that velocity.
    Synth,
    /// Register template to target and write the report, history and results.
    Register,
    /// Warp the template by a stored velocity.
    Warp {
        /// Warp by the inverse flow instead.
        #[arg(long)]
        inverse: bool,
    },
    /// Run the numerical check suite.
    Verify,
    /// Describe the resolved configuration, or the given field files.
    Info { files: Vec<PathBuf> },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: fracreg::Error,
    },
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn stage(stage: &'static str, source: fracreg::Error) -> Self {
        CliError::Stage { stage, source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Verification(_) => 4,
            CliError::Stage { source, .. } => match source.kind() {
                ErrorKind::Argument => 2,
                ErrorKind::Data => 3,
                ErrorKind::Numerical => 5,
            },
        }
    }
}

/// Attaches a stage name to core errors.
pub trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError>;
}

impl<T> Stage<T> for fracreg::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError> {
        self.map_err(|e| CliError::stage(stage, e))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
