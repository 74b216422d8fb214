//! Experiment runner for the `gne-core` solvers.
//!
//! A run builds one benchmark game, solves it with restarts and writes
//! `trace.csv`, `summary.json` and `game.json` into its output directory.
//! A sweep repeats the run over seeds, concurrently, and aggregates the results.

pub mod cli;
pub mod config;
pub mod experiment;
pub mod sweep;
pub mod trace;

use std::path::PathBuf;

use gne_core::GneError;
use thiserror::Error;

pub use config::{Assignment, ExperimentConfig};
pub use experiment::{run_experiment, RunSummary};
pub use sweep::{sweep, Aggregate};
pub use trace::{read_trace, write_trace, TraceRecord};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("config error at {origin}: {message}")]
    Config { origin: String, message: String },

    #[error("solver failed: {0}")]
    Solver(#[from] GneError),

    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("trace {path}: {message}")]
    Trace { path: String, message: String },
}

impl BenchError {
    /// Process exit code: 1 for configuration errors, 2 for divergence, 3 for IO.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config { .. } => 1,
            BenchError::Solver(GneError::Divergence { .. } | GneError::NonFinite(_)) => 2,
            BenchError::Solver(_) => 1,
            BenchError::Io { .. } | BenchError::Trace { .. } => 3,
        }
    }
}
