//! Command-line surface. Every experiment flag is an override of the config
//! key with the same name, so file and flags share one parser.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{Assignment, ExperimentConfig};
use crate::BenchError;

#[derive(Debug, Parser)]
#[command(name = "gne-bench", version, about = "Run exploitability-minimization experiments on benchmark pseudo-games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one game and write trace.csv, summary.json and game.json.
    Run(RunArgs),
    /// Repeat a run over several seeds and write aggregate.json.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub flags: ConfigFlags,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seeds as a list with ranges, e.g. `1-10` or `1,4,7`.
    #[arg(long)]
    pub seeds: String,
    #[command(flatten)]
    pub flags: ConfigFlags,
}

#[derive(Debug, Default, Args)]
pub struct ConfigFlags {
    /// bilinear-zs | bilinear-gs | monotone
    #[arg(long)]
    pub game: Option<String>,
    /// Number of players (monotone game only).
    #[arg(long)]
    pub n: Option<String>,
    /// Per-player action dimension.
    #[arg(long)]
    pub m: Option<String>,
    /// affine | ball
    #[arg(long)]
    pub constraint: Option<String>,
    /// Game seed (also the start seed unless --init-seed is given).
    #[arg(long, alias = "game-seed")]
    pub seed: Option<String>,
    #[arg(long)]
    pub init_seed: Option<String>,
    /// eda | ada
    #[arg(long)]
    pub solver: Option<String>,
    #[arg(long)]
    pub eta: Option<String>,
    #[arg(long)]
    pub eta_a: Option<String>,
    #[arg(long)]
    pub eta_b: Option<String>,
    /// ADA regularization (default 0.1).
    #[arg(long)]
    pub c: Option<String>,
    /// Iterations per run (default 50).
    #[arg(long)]
    pub iters: Option<String>,
    #[arg(long)]
    pub inner_iters: Option<String>,
    /// zero | warm
    #[arg(long)]
    pub inner_init: Option<String>,
    /// Report the averaged EDA iterate (true) or the last one (false).
    #[arg(long)]
    pub average: Option<String>,
    #[arg(long)]
    pub max_restarts: Option<String>,
    #[arg(long)]
    pub threshold: Option<String>,
    #[arg(long)]
    pub record_every: Option<String>,
    /// Regularization of the recorded gradient-map norm.
    #[arg(long)]
    pub metric_c: Option<String>,
    #[arg(long)]
    pub out_dir: Option<String>,
}

impl ConfigFlags {
    pub fn assignments(&self) -> Vec<Assignment> {
        let pairs = [
            ("game", &self.game),
            ("n", &self.n),
            ("m", &self.m),
            ("constraint", &self.constraint),
            ("seed", &self.seed),
            ("init_seed", &self.init_seed),
            ("solver", &self.solver),
            ("eta", &self.eta),
            ("eta_a", &self.eta_a),
            ("eta_b", &self.eta_b),
            ("c", &self.c),
            ("iters", &self.iters),
            ("inner_iters", &self.inner_iters),
            ("inner_init", &self.inner_init),
            ("average", &self.average),
            ("max_restarts", &self.max_restarts),
            ("threshold", &self.threshold),
            ("record_every", &self.record_every),
            ("metric_c", &self.metric_c),
            ("out_dir", &self.out_dir),
        ];
        pairs
            .into_iter()
            .filter_map(|(key, value)| {
                value.as_ref().map(|v| Assignment::new(key, v.clone(), format!("--{}", key.replace('_', "-"))))
            })
            .collect()
    }

    pub fn load(&self, file: Option<&std::path::Path>) -> Result<ExperimentConfig, BenchError> {
        ExperimentConfig::load(file, &self.assignments())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::KEYS;

    #[test]
    fn every_config_key_has_a_flag() {
        let flags = ConfigFlags {
            game: Some("x".into()),
            n: Some("x".into()),
            m: Some("x".into()),
            constraint: Some("x".into()),
            seed: Some("x".into()),
            init_seed: Some("x".into()),
            solver: Some("x".into()),
            eta: Some("x".into()),
            eta_a: Some("x".into()),
            eta_b: Some("x".into()),
            c: Some("x".into()),
            iters: Some("x".into()),
            inner_iters: Some("x".into()),
            inner_init: Some("x".into()),
            average: Some("x".into()),
            max_restarts: Some("x".into()),
            threshold: Some("x".into()),
            record_every: Some("x".into()),
            metric_c: Some("x".into()),
            out_dir: Some("x".into()),
        };
        let keys: Vec<String> = flags.assignments().into_iter().map(|a| a.key).collect();
        assert_eq!(keys, KEYS);
    }

    #[test]
    fn flag_errors_name_the_flag() {
        let cli = Cli::try_parse_from(["gne-bench", "run", "--eta", "fast"]).unwrap();
        let Command::Run(args) = cli.command else { panic!() };
        let err = args.flags.load(None).unwrap_err();
        assert!(err.to_string().contains("--eta"), "{err}");
    }

    #[test]
    fn minimal_run_flags_parse() {
        let cli = Cli::try_parse_from([
            "gne-bench", "run", "--game", "bilinear-zs", "--m", "10", "--constraint", "affine", "--solver", "eda",
            "--iters", "500", "--seed", "7",
        ])
        .unwrap();
        let Command::Run(args) = cli.command else { panic!() };
        let cfg = args.flags.load(None).unwrap();
        assert_eq!((cfg.m, cfg.iters, cfg.seed), (10, 500, 7));
    }
}
