//! Experiment configuration: a flat `key = value` file plus overrides.

use std::fs;
use std::path::{Path, PathBuf};

use gne_core::solvers::{
    default_steps, AdaConfig, Algorithm, EdaConfig, InnerInit, RestartPolicy, SolverConfig, StepDefaults,
    TraceSettings, DEFAULT_REGULARIZATION,
};
use gne_core::{make_benchmark, ConstraintKind, GameFamily, GameSpec};
use serde::{Deserialize, Serialize};

use crate::BenchError;

/// Every key accepted in a config file. Flags use the same names with dashes.
pub const KEYS: &[&str] = &[
    "game",
    "n",
    "m",
    "constraint",
    "seed",
    "init_seed",
    "solver",
    "eta",
    "eta_a",
    "eta_b",
    "c",
    "iters",
    "inner_iters",
    "inner_init",
    "average",
    "max_restarts",
    "threshold",
    "record_every",
    "metric_c",
    "out_dir",
];

pub const DEFAULT_ITERATIONS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub game: GameFamily,
    /// Number of players; fixed at 2 for the bilinear families.
    pub n: usize,
    /// Per-player action dimension.
    pub m: usize,
    pub constraint: ConstraintKind,
    /// Seed of the game instance.
    pub seed: u64,
    /// Seed of the random starts; defaults to `seed`.
    pub init_seed: Option<u64>,
    pub solver: Algorithm,
    pub eta: Option<f64>,
    pub eta_a: Option<f64>,
    pub eta_b: Option<f64>,
    pub c: f64,
    pub iters: usize,
    pub inner_iters: Option<usize>,
    pub inner_init: InnerInit,
    pub average: bool,
    pub max_restarts: usize,
    pub threshold: f64,
    pub record_every: Option<usize>,
    pub metric_c: Option<f64>,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let policy = RestartPolicy::default();
        Self {
            game: GameFamily::BilinearZeroSum,
            n: 2,
            m: 1,
            constraint: ConstraintKind::Affine,
            seed: 0,
            init_seed: None,
            solver: Algorithm::Eda,
            eta: None,
            eta_a: None,
            eta_b: None,
            c: DEFAULT_REGULARIZATION,
            iters: DEFAULT_ITERATIONS,
            inner_iters: None,
            inner_init: InnerInit::ZeroProjected,
            average: true,
            max_restarts: policy.max_restarts,
            threshold: policy.threshold,
            record_every: None,
            metric_c: None,
            out_dir: PathBuf::from("out"),
        }
    }
}

/// One `key = value` assignment and where it came from (`file:line` or `--flag`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub key: String,
    pub value: String,
    pub origin: String,
}

impl Assignment {
    pub fn new(key: impl Into<String>, value: impl Into<String>, origin: impl Into<String>) -> Self {
        Self { key: key.into(), value: value.into(), origin: origin.into() }
    }
}

/// Everything a run needs, with automatic step sizes filled in.
#[derive(Debug, Clone)]
pub struct ResolvedExperiment {
    pub game: GameSpec,
    pub solver: SolverConfig,
    pub policy: RestartPolicy,
    pub trace: TraceSettings,
    pub init_seed: u64,
}

fn config_error(origin: &str, message: impl Into<String>) -> BenchError {
    BenchError::Config { origin: origin.to_string(), message: message.into() }
}

/// Reads `key = value` lines; `#` starts a comment. Repeated keys are rejected.
pub fn read_config_file(path: &Path) -> Result<Vec<Assignment>, BenchError> {
    let text = fs::read_to_string(path).map_err(|source| BenchError::Io { path: path.to_path_buf(), source })?;
    parse_config_text(&text, &path.display().to_string())
}

pub fn parse_config_text(text: &str, source_name: &str) -> Result<Vec<Assignment>, BenchError> {
    let mut out: Vec<Assignment> = Vec::new();
    for (number, raw) in text.lines().enumerate() {
        let origin = format!("{source_name}:{}", number + 1);
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config_error(&origin, format!("expected `key = value`, got `{line}`")))?;
        let key = normalize_key(key.trim());
        if let Some(previous) = out.iter().find(|a| a.key == key) {
            return Err(config_error(&origin, format!("`{key}` already set at {}", previous.origin)));
        }
        out.push(Assignment::new(key, value.trim(), origin));
    }
    Ok(out)
}

fn normalize_key(key: &str) -> String {
    let key = key.replace('-', "_");
    match key.as_str() {
        "game_seed" => "seed".to_string(),
        _ => key,
    }
}

fn parse<T: std::str::FromStr>(a: &Assignment) -> Result<T, BenchError>
where
    T::Err: std::fmt::Display,
{
    a.value.parse().map_err(|e| config_error(&a.origin, format!("bad value `{}` for `{}`: {e}", a.value, a.key)))
}

fn parse_inner_init(a: &Assignment) -> Result<InnerInit, BenchError> {
    match a.value.as_str() {
        "zero" | "zero-projected" => Ok(InnerInit::ZeroProjected),
        "warm" | "warm-start" => Ok(InnerInit::WarmStart),
        other => Err(config_error(&a.origin, format!("`inner_init` must be `zero` or `warm`, got `{other}`"))),
    }
}

impl ExperimentConfig {
    /// Defaults, then the file (if any), then `overrides` in order.
    pub fn load(file: Option<&Path>, overrides: &[Assignment]) -> Result<Self, BenchError> {
        let mut cfg = Self::default();
        if let Some(path) = file {
            cfg.apply_all(&read_config_file(path)?)?;
        }
        cfg.apply_all(overrides)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_all(&mut self, assignments: &[Assignment]) -> Result<(), BenchError> {
        assignments.iter().try_for_each(|a| self.apply(a))
    }

    pub fn apply(&mut self, a: &Assignment) -> Result<(), BenchError> {
        let key = normalize_key(&a.key);
        let a = &Assignment::new(key, a.value.clone(), a.origin.clone());
        match a.key.as_str() {
            "game" => self.game = parse(a)?,
            "n" => self.n = parse(a)?,
            "m" => self.m = parse(a)?,
            "constraint" => self.constraint = parse(a)?,
            "seed" => self.seed = parse(a)?,
            "init_seed" => self.init_seed = Some(parse(a)?),
            "solver" => self.solver = parse(a)?,
            "eta" => self.eta = Some(parse(a)?),
            "eta_a" => self.eta_a = Some(parse(a)?),
            "eta_b" => self.eta_b = Some(parse(a)?),
            "c" => self.c = parse(a)?,
            "iters" => self.iters = parse(a)?,
            "inner_iters" => self.inner_iters = Some(parse(a)?),
            "inner_init" => self.inner_init = parse_inner_init(a)?,
            "average" => self.average = parse(a)?,
            "max_restarts" => self.max_restarts = parse(a)?,
            "threshold" => self.threshold = parse(a)?,
            "record_every" => self.record_every = Some(parse(a)?),
            "metric_c" => self.metric_c = Some(parse(a)?),
            "out_dir" => self.out_dir = PathBuf::from(&a.value),
            other => return Err(config_error(&a.origin, format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let fail = |key: &str, message: String| Err(config_error(key, message));
        if self.iters == 0 {
            return fail("iters", "need at least one iteration".into());
        }
        if self.m == 0 {
            return fail("m", "action dimension must be >= 1".into());
        }
        if self.game == GameFamily::MonotoneNormMin && self.n < 2 {
            return fail("n", format!("the monotone game needs at least 2 players, got {}", self.n));
        }
        if self.inner_iters == Some(0) {
            return fail("inner_iters", "need at least one inner iteration".into());
        }
        for (key, value) in [("eta", self.eta), ("eta_a", self.eta_a), ("eta_b", self.eta_b), ("metric_c", self.metric_c)]
        {
            if let Some(v) = value {
                if !(v > 0.0 && v.is_finite()) {
                    return fail(key, format!("must be positive and finite, got {v}"));
                }
            }
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return fail("c", format!("must be positive and finite, got {}", self.c));
        }
        if self.threshold.is_nan() {
            return fail("threshold", "must be a number".into());
        }
        let ada_only = [("eta_a", self.eta_a.is_some()), ("eta_b", self.eta_b.is_some()), ("inner_iters", self.inner_iters.is_some())];
        match self.solver {
            Algorithm::Eda => {
                if let Some((key, _)) = ada_only.iter().find(|(_, set)| *set) {
                    return fail(key, "only applies to solver = ada".into());
                }
            }
            Algorithm::Ada => {
                if self.eta.is_some() {
                    return fail("eta", "only applies to solver = eda; use eta_a and eta_b".into());
                }
            }
        }
        Ok(())
    }

    pub fn init_seed(&self) -> u64 {
        self.init_seed.unwrap_or(self.seed)
    }

    pub fn build_game(&self) -> Result<GameSpec, BenchError> {
        make_benchmark(self.game, self.n, self.m, self.constraint, self.seed)
            .map_err(|e| config_error("game", e.to_string()))
    }

    /// Builds the game and fills every automatic step size.
    pub fn resolve(&self) -> Result<ResolvedExperiment, BenchError> {
        self.validate()?;
        let game = self.build_game()?;
        let auto = default_steps(&game, self.solver, Some(self.c)).map_err(|e| config_error("solver", e.to_string()))?;
        let solver = match auto {
            StepDefaults::Eda { eta } => {
                let mut cfg = EdaConfig::new(self.eta.unwrap_or(eta), self.iters);
                cfg.record_average = self.average;
                SolverConfig::Eda(cfg)
            }
            StepDefaults::Ada { eta_a, eta_b, inner_iterations } => SolverConfig::Ada(AdaConfig {
                eta_a: self.eta_a.unwrap_or(eta_a),
                eta_b: self.eta_b.unwrap_or(eta_b),
                c: self.c,
                outer_iterations: self.iters,
                inner_iterations: self.inner_iters.unwrap_or(inner_iterations),
                inner_init: self.inner_init,
                inner_tol: None,
            }),
        };
        let mut trace = TraceSettings::for_iterations(self.iters);
        if let Some(k) = self.record_every {
            trace.record_every = k;
        }
        trace.metric_c = self.metric_c;
        Ok(ResolvedExperiment {
            game,
            solver,
            policy: RestartPolicy { max_restarts: self.max_restarts, threshold: self.threshold },
            trace,
            init_seed: self.init_seed(),
        })
    }
}
