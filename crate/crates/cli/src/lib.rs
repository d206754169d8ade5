//! Command-line front end for the `zll` experiments: configuration,
//! dispatch, report serialization and plot-data emission.

pub mod config;
pub mod plot;
pub mod report;
pub mod run;

pub use config::{Experiment, ExperimentConfig, Format, PartialConfig};
pub use report::{Check, Report, RunStatus};

use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_BAND: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] zll_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("report input: {0}")]
    Input(String),
}

impl CliError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
