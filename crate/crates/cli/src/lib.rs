//! Scenario runner for plane wave limit computations.
//!
//! Each subcommand reads one scenario (a TOML file, a built-in name, or
//! both), runs a pipeline from [`planewave`] and writes CSV and JSON files
//! into an output directory. Outputs depend only on the configuration.

pub mod config;
pub mod run;

use std::path::Path;

pub use config::Config;
pub use run::{parse_span, Outcome, Overrides};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<planewave::Error> for CliError {
    fn from(e: planewave::Error) -> Self {
        match e {
            planewave::Error::Expr(_) | planewave::Error::InvalidInput(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<planewave::exprlang::ExprError> for CliError {
    fn from(e: planewave::exprlang::ExprError) -> Self {
        CliError::Config(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pipeline {
    Limit,
    Classify,
    Conjugate,
    Verify,
    Rosen,
    Flow,
}

pub fn execute(p: Pipeline, cfg: &Config, ov: &Overrides) -> Result<Outcome, CliError> {
    match p {
        Pipeline::Limit => run::run_limit(cfg, ov),
        Pipeline::Classify => run::run_classify(cfg, ov),
        Pipeline::Conjugate => run::run_conjugate(cfg, ov),
        Pipeline::Verify => run::run_verify(cfg, ov),
        Pipeline::Rosen => run::run_rosen(cfg, ov),
        Pipeline::Flow => run::run_flow(cfg, ov),
    }
}

/// Write every file of an outcome under `dir`, creating it if needed.
pub fn write_outcome(o: &Outcome, dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    for (name, body) in &o.files {
        std::fs::write(dir.join(name), body)?;
    }
    Ok(())
}
