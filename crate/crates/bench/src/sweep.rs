//! Independent runs over a list of seeds, executed on a rayon pool.

use std::fs;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::experiment::{run_experiment, write_json, RunSummary};
use crate::BenchError;

pub const AGGREGATE_FILE: &str = "aggregate.json";
pub const THREADS_ENV: &str = "GNE_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub seed: u64,
    pub summary: Option<RunSummary>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub runs: usize,
    pub converged: usize,
    pub failed: usize,
    pub threshold: f64,
    pub median_final_exploitability: Option<f64>,
    pub median_restarts: Option<f64>,
    pub entries: Vec<SweepEntry>,
}

impl Aggregate {
    /// The aggregate with every wall time zeroed, for comparisons across sweeps.
    pub fn without_timing(&self) -> Self {
        let mut out = self.clone();
        for entry in &mut out.entries {
            entry.summary = entry.summary.as_ref().map(RunSummary::without_timing);
        }
        out
    }
}

fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 { values[mid] } else { 0.5 * (values[mid - 1] + values[mid]) })
}

/// Thread cap from `GNE_THREADS`; `None` lets rayon decide.
pub fn threads_from_env() -> Result<Option<usize>, BenchError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(text) => match text.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(BenchError::Config {
                origin: THREADS_ENV.into(),
                message: format!("expected a positive thread count, got `{text}`"),
            }),
        },
    }
}

/// Parses `1,2,5-8` into a seed list.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>, BenchError> {
    let bad = |part: &str| BenchError::Config { origin: "--seeds".into(), message: format!("bad seed `{part}`") };
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((lo, hi)) => {
                let (lo, hi): (u64, u64) = (lo.parse().map_err(|_| bad(part))?, hi.parse().map_err(|_| bad(part))?);
                if lo > hi {
                    return Err(bad(part));
                }
                seeds.extend(lo..=hi);
            }
            None => seeds.push(part.parse().map_err(|_| bad(part))?),
        }
    }
    Ok(seeds)
}

/// Runs `base` once per seed (as both game and start seed) in
/// `base.out_dir/seed-<s>/`, then writes `aggregate.json` to `base.out_dir`.
/// A failing run is recorded in its entry; the others still run.
pub fn sweep(base: &ExperimentConfig, seeds: &[u64], threads: Option<usize>) -> Result<Aggregate, BenchError> {
    if seeds.is_empty() {
        return Err(BenchError::Config { origin: "--seeds".into(), message: "need at least one seed".into() });
    }
    base.validate()?;
    fs::create_dir_all(&base.out_dir).map_err(|source| BenchError::Io { path: base.out_dir.clone(), source })?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| BenchError::Config { origin: THREADS_ENV.into(), message: e.to_string() })?;
    let entries: Vec<SweepEntry> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                let cfg = ExperimentConfig {
                    seed,
                    init_seed: Some(seed),
                    out_dir: base.out_dir.join(format!("seed-{seed}")),
                    ..base.clone()
                };
                match run_experiment(&cfg) {
                    Ok(summary) => SweepEntry { seed, summary: Some(summary), error: None },
                    Err(e) => SweepEntry { seed, summary: None, error: Some(e.to_string()) },
                }
            })
            .collect()
    });
    let summaries: Vec<&RunSummary> = entries.iter().filter_map(|e| e.summary.as_ref()).collect();
    let aggregate = Aggregate {
        runs: entries.len(),
        converged: summaries.iter().filter(|s| s.converged).count(),
        failed: entries.len() - summaries.len(),
        threshold: base.threshold,
        median_final_exploitability: median(summaries.iter().map(|s| s.final_exploitability).collect()),
        median_restarts: median(summaries.iter().map(|s| s.restarts as f64).collect()),
        entries,
    };
    write_json(&base.out_dir.join(AGGREGATE_FILE), &aggregate)?;
    Ok(aggregate)
}
