use std::fs;
use std::path::Path;
use std::process::Command;

use gne_bench::config::{parse_config_text, ExperimentConfig};
use gne_bench::experiment::{SUMMARY_FILE, TRACE_FILE};
use gne_bench::sweep::AGGREGATE_FILE;
use gne_bench::{read_trace, run_experiment, sweep, Aggregate, Assignment, RunSummary};
use gne_core::{GameSpec, PseudoGame};
use gne_oracles::is_feasible;

fn config(out: &Path, pairs: &[(&str, &str)]) -> ExperimentConfig {
    let mut assignments: Vec<Assignment> = pairs.iter().map(|(k, v)| Assignment::new(*k, *v, "test")).collect();
    assignments.push(Assignment::new("out_dir", out.to_str().unwrap(), "test"));
    ExperimentConfig::load(None, &assignments).unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gne-bench"))
}

#[test]
fn trace_reloads_to_the_recorded_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &[("game", "bilinear-gs"), ("m", "2"), ("constraint", "ball"), ("iters", "40"), ("max_restarts", "2")]);
    let summary = run_experiment(&cfg).unwrap();
    let text = fs::read_to_string(dir.path().join(TRACE_FILE)).unwrap();
    let records = read_trace(text.as_bytes(), "trace.csv").unwrap();
    assert_eq!(records.len(), 41 * (summary.restarts + 1));

    let game = GameSpec::from_json(&fs::read_to_string(dir.path().join("game.json")).unwrap()).unwrap();
    for r in &records {
        assert_eq!(r.solver, "eda");
        assert!(r.exploitability.is_finite() && r.grad_map_norm.is_finite());
        assert!(r.exploitability >= -1e-6);
        assert!(is_feasible(game.feasible_set(), &r.profile, 1e-8));
    }
    for run in records.chunk_by(|x, y| x.restart_index == y.restart_index) {
        assert!(run.windows(2).all(|w| w[0].iter < w[1].iter));
    }

    // Rewriting the parsed records reproduces the file byte for byte.
    let mut again = Vec::new();
    gne_bench::write_trace(&mut again, game.layout().total_len(), &records).unwrap();
    assert_eq!(String::from_utf8(again).unwrap(), text);

    let reloaded: RunSummary = serde_json::from_str(&fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap()).unwrap();
    assert_eq!(reloaded, summary);
}

#[test]
fn monotone_setup_smoke_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        &[("game", "monotone"), ("n", "5"), ("m", "10"), ("eta", "0.02"), ("iters", "2000"), ("max_restarts", "0")],
    );
    let summary = run_experiment(&cfg).unwrap();
    assert!(summary.final_exploitability.is_finite());
    assert!(summary.best_grad_map_norm.is_some_and(f64::is_finite));
    for file in [TRACE_FILE, SUMMARY_FILE, "game.json"] {
        assert!(dir.path().join(file).is_file(), "{file} missing");
    }
}

#[test]
fn identical_configs_write_identical_traces() {
    let (one, two) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let pairs = [("solver", "ada"), ("m", "2"), ("iters", "30"), ("max_restarts", "1"), ("threshold", "0")];
    let first = run_experiment(&config(one.path(), &pairs)).unwrap();
    let second = run_experiment(&config(two.path(), &pairs)).unwrap();
    let read = |d: &Path| fs::read(d.join(TRACE_FILE)).unwrap();
    assert_eq!(read(one.path()), read(two.path()));
    let mut second = second.without_timing();
    second.config.out_dir = first.config.out_dir.clone();
    assert_eq!(first.without_timing(), second);
}

fn normalized(aggregate: &Aggregate) -> Aggregate {
    let mut out = aggregate.without_timing();
    for entry in &mut out.entries {
        if let Some(s) = entry.summary.as_mut() {
            s.config.out_dir = Default::default();
        }
    }
    out
}

#[test]
fn sweep_is_independent_of_the_thread_count() {
    let (serial, parallel) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let pairs = [("m", "2"), ("iters", "100"), ("max_restarts", "2")];
    let seeds: Vec<u64> = (1..=10).collect();
    let a = sweep(&config(serial.path(), &pairs), &seeds, Some(1)).unwrap();
    let b = sweep(&config(parallel.path(), &pairs), &seeds, Some(4)).unwrap();
    assert_eq!(normalized(&a), normalized(&b));
    let written: Aggregate = serde_json::from_str(&fs::read_to_string(serial.path().join(AGGREGATE_FILE)).unwrap()).unwrap();
    assert_eq!(written, a);
}

#[test]
fn single_seed_aggregate_is_that_run() {
    let dir = tempfile::tempdir().unwrap();
    let base = config(dir.path(), &[("m", "2"), ("iters", "60"), ("max_restarts", "1")]);
    let aggregate = sweep(&base, &[4], Some(1)).unwrap();
    let run = run_experiment(&ExperimentConfig {
        seed: 4,
        init_seed: Some(4),
        out_dir: dir.path().join("direct"),
        ..base.clone()
    })
    .unwrap();
    assert_eq!(aggregate.runs, 1);
    assert_eq!(aggregate.median_final_exploitability, Some(run.final_exploitability));
    assert_eq!(aggregate.median_restarts, Some(run.restarts as f64));
    assert_eq!(aggregate.converged, usize::from(run.converged));
    let mut swept = aggregate.entries[0].summary.clone().unwrap().without_timing();
    swept.config.out_dir = run.config.out_dir.clone();
    assert_eq!(swept, run.without_timing());
}

#[test]
fn convex_concave_sweep_converges_for_every_seed() {
    let dir = tempfile::tempdir().unwrap();
    let base = config(dir.path(), &[("game", "bilinear-zs"), ("m", "1"), ("constraint", "affine"), ("iters", "1000")]);
    let seeds: Vec<u64> = (1..=10).collect();
    let aggregate = sweep(&base, &seeds, None).unwrap();
    assert_eq!((aggregate.converged, aggregate.runs), (10, 10), "{aggregate:?}");
}

#[test]
fn a_failing_run_does_not_stop_the_sweep() {
    let dir = tempfile::tempdir().unwrap();
    // A plain file where seed 3's output directory should go.
    fs::write(dir.path().join("seed-3"), "").unwrap();
    let aggregate = sweep(&config(dir.path(), &[("iters", "10"), ("max_restarts", "0")]), &[1, 2, 3, 4], Some(2)).unwrap();
    assert_eq!((aggregate.runs, aggregate.failed), (4, 1));
    let failed = aggregate.entries.iter().find(|e| e.seed == 3).unwrap();
    assert!(failed.summary.is_none() && failed.error.is_some());
    assert!(aggregate.entries.iter().filter(|e| e.seed != 3).all(|e| e.summary.is_some()));
}

#[test]
fn config_file_and_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("exp.cfg");
    fs::write(&file, "game = monotone\nn = 3\nm = 2\neta = 0.05\niters = 20\nmax_restarts = 0\n").unwrap();
    let out = dir.path().join("out");
    let status = bin()
        .args(["run", "--config", file.to_str().unwrap(), "--eta", "0.01", "--out-dir", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    let summary: RunSummary = serde_json::from_str(&fs::read_to_string(out.join(SUMMARY_FILE)).unwrap()).unwrap();
    assert_eq!(summary.config.eta, Some(0.01));
    assert_eq!((summary.config.n, summary.config.m, summary.iterations), (3, 2, 20));
    let from_text = parse_config_text(&fs::read_to_string(&file).unwrap(), "exp.cfg").unwrap();
    assert_eq!(from_text.len(), 6);
}

#[test]
fn exit_codes_distinguish_config_and_io_failures() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| bin().args(args).output().unwrap().status.code();
    assert_eq!(code(&["run", "--iters", "0"]), Some(1));
    assert_eq!(code(&["run", "--no-such-flag", "1"]), Some(1));
    let bad_file = dir.path().join("bad.cfg");
    fs::write(&bad_file, "colour = blue\n").unwrap();
    assert_eq!(code(&["run", "--config", bad_file.to_str().unwrap()]), Some(1));
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let nested = blocker.join("out");
    assert_eq!(code(&["run", "--iters", "5", "--max-restarts", "0", "--out-dir", nested.to_str().unwrap()]), Some(3));
    assert_eq!(code(&["sweep", "--seeds", "", "--iters", "5"]), Some(1));
}
