use std::fs;
use std::path::Path;
use std::time::Instant;

use gne_core::solvers::{restart_solve, SolverConfig};
use gne_core::PseudoGame;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::trace::{write_trace, TraceRecord};
use crate::BenchError;

pub const TRACE_FILE: &str = "trace.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const GAME_FILE: &str = "game.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    /// VE exploitability of the best run's output profile.
    pub final_exploitability: f64,
    pub best_grad_map_norm: Option<f64>,
    pub converged: bool,
    /// Iterations per run.
    pub iterations: usize,
    pub restarts: usize,
    pub output_profile: Vec<f64>,
    pub wall_time_seconds: f64,
    pub config: ExperimentConfig,
    /// The solver configuration after automatic step sizes were filled in.
    pub solver: SolverConfig,
    pub version: String,
}

impl RunSummary {
    /// The summary with wall time zeroed, for comparisons across runs.
    pub fn without_timing(&self) -> Self {
        Self { wall_time_seconds: 0.0, ..self.clone() }
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io { path: path.to_path_buf(), source }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), BenchError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| BenchError::Io { path: path.to_path_buf(), source: e.into() })?;
    fs::write(path, text + "\n").map_err(io_error(path))
}

/// Solves the configured game with restarts and writes the trace, summary and
/// game files into `cfg.out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary, BenchError> {
    let started = Instant::now();
    let resolved = cfg.resolve()?;
    let out_dir = cfg.out_dir.as_path();
    fs::create_dir_all(out_dir).map_err(io_error(out_dir))?;

    let game_path = out_dir.join(GAME_FILE);
    let game_json = resolved.game.to_json()?;
    fs::write(&game_path, game_json + "\n").map_err(io_error(&game_path))?;

    let mut rng = ChaCha8Rng::seed_from_u64(resolved.init_seed);
    let outcome = restart_solve(&resolved.game, &resolved.solver, &resolved.policy, &resolved.trace, &mut rng)?;

    let algorithm = resolved.solver.algorithm();
    let records: Vec<TraceRecord> = outcome
        .runs
        .iter()
        .flat_map(|run| run.trace.iter().map(move |row| TraceRecord::from_row(row, algorithm, run.restart_index)))
        .collect();
    let trace_path = out_dir.join(TRACE_FILE);
    let mut csv = Vec::new();
    write_trace(&mut csv, resolved.game.layout().total_len(), &records)?;
    fs::write(&trace_path, csv).map_err(io_error(&trace_path))?;

    let best = outcome.best_run();
    let summary = RunSummary {
        final_exploitability: best.final_exploitability,
        best_grad_map_norm: best.best_grad_map_norm,
        converged: outcome.converged,
        iterations: resolved.solver.iterations(),
        restarts: outcome.restarts,
        output_profile: best.output.values().to_vec(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        config: cfg.clone(),
        solver: resolved.solver,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    write_json(&out_dir.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}
