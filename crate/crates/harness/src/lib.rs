//! Experiment runner for the optimizer comparisons and the property-check
//! suites behind the `gradavg` command-line tool.

pub mod checks;
pub mod config;
pub mod experiment;
pub mod grid;
pub mod metrics;

use std::path::PathBuf;

use gradavg_core::data::DataError;
use gradavg_core::{NumError, OptimError};
use thiserror::Error;

pub use checks::{run_checks, CheckOptions, CheckReport, PropertyResult, Suite};
pub use config::{ExperimentConfig, Preset, Task};
pub use experiment::{run_experiment, RunStatus, RunSummary};
pub use grid::{run_grid, GridRow, GridTable};
pub use metrics::{MetricsWriter, RunRecord};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const PROPERTY_FAILURE: u8 = 1;
    pub const DIVERGED: u8 = 2;
    pub const IO_OR_CONFIG: u8 = 3;
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Data(#[from] DataError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Numeric(#[from] NumError),

    #[error(transparent)]
    Optim(#[from] OptimError),
}
