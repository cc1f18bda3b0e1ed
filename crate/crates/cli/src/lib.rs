//! Command-line front end: reference table, scenario runs and sweeps.

use std::path::PathBuf;

use thiserror::Error;
use tsch_ls_core::sim::SimError;
use tsch_ls_core::ConfigError;

pub mod format;
pub mod report;
pub mod scenario;
pub mod sweep;
pub mod table1;

pub use format::Format;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid scenario file: {0}")]
    Schema(String),
    #[error("invalid scenario: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{0}")]
    BadValue(String),
    #[error("table deviates from reference values:\n{}", .0.join("\n"))]
    GoldenMismatch(Vec<String>),
}

impl CliError {
    /// 2 for a reference-value mismatch, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::GoldenMismatch(_) => 2,
            _ => 1,
        }
    }
}
