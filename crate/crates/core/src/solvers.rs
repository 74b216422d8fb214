//! Extragradient descent-ascent (EDA), augmented descent-ascent (ADA), their
//! default step sizes, the random-restart driver and trace recording.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, GneError, Result};
use crate::games::PseudoGame;
use crate::profile::{dist, norm, StrategyProfile};
use crate::regret::{evaluate_moreau, exploitability_ve, gradient_map, gradients_into, inner_gap_bound, GradScratch, OracleConfig};

/// Iterates whose norm exceeds this abort the run.
pub const DIVERGENCE_NORM: f64 = 1e6;

/// Target gradient error used when sizing the ADA inner loop automatically.
pub const DEFAULT_INNER_EPSILON: f64 = 1e-3;

/// Regularization used by ADA when none is given, and for the stationarity metric of EDA traces.
pub const DEFAULT_REGULARIZATION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Eda,
    Ada,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Eda => "eda",
            Algorithm::Ada => "ada",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = GneError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eda" => Ok(Algorithm::Eda),
            "ada" => Ok(Algorithm::Ada),
            other => Err(GneError::InvalidParameter(format!("unknown solver `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdaConfig {
    pub eta: f64,
    pub iterations: usize,
    pub record_average: bool,
}

impl EdaConfig {
    pub fn new(eta: f64, iterations: usize) -> Self {
        Self { eta, iterations, record_average: true }
    }

    fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(GneError::InvalidParameter(format!("EDA step must be positive, got {}", self.eta)));
        }
        if self.iterations == 0 {
            return Err(GneError::InvalidParameter("EDA needs at least one iteration".into()));
        }
        Ok(())
    }
}

/// Where each ADA inner loop starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerInit {
    /// `Π(0)`, reset every outer step.
    ZeroProjected,
    /// The previous outer step's `b`.
    WarmStart,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaConfig {
    pub eta_a: f64,
    pub eta_b: f64,
    pub c: f64,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub inner_init: InnerInit,
    /// Ends an inner loop early once a step moves less than this.
    pub inner_tol: Option<f64>,
}

impl AdaConfig {
    fn validate(&self) -> Result<()> {
        for (name, v) in [("eta_a", self.eta_a), ("eta_b", self.eta_b), ("c", self.c)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(GneError::InvalidParameter(format!("ADA {name} must be positive, got {v}")));
            }
        }
        if self.outer_iterations == 0 || self.inner_iterations == 0 {
            return Err(GneError::InvalidParameter("ADA needs at least one outer and one inner iteration".into()));
        }
        Ok(())
    }
}

/// How often and how precisely traces are measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSettings {
    /// Record every `k`-th iteration (plus the first and last); 0 disables recording.
    pub record_every: usize,
    /// Regularization of the stationarity metric; ADA uses its own `c` when unset.
    pub metric_c: Option<f64>,
    pub oracle: OracleConfig,
}

impl TraceSettings {
    /// `k = 1` up to 100 iterations, otherwise `T / 100`.
    pub fn for_iterations(iterations: usize) -> Self {
        let record_every = if iterations <= 100 { 1 } else { iterations / 100 };
        Self { record_every, metric_c: None, oracle: OracleConfig::default() }
    }

    pub fn disabled() -> Self {
        Self { record_every: 0, metric_c: None, oracle: OracleConfig::default() }
    }

    fn records(&self, t: usize, last: usize) -> bool {
        self.record_every > 0 && (t.is_multiple_of(self.record_every) || t == last)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub profile: Vec<f64>,
    pub deviation: Vec<f64>,
    /// VE exploitability of `profile`.
    pub exploitability: f64,
    /// `‖G_η(a^t)‖` with the exact Moreau gradient.
    pub grad_map_norm: f64,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdaOutcome {
    pub last_a: StrategyProfile,
    pub last_b: StrategyProfile,
    /// `(1/T) Σ_{t=1..T} a^t` and the same for `b`, when averaging is enabled.
    pub average: Option<(StrategyProfile, StrategyProfile)>,
    pub trace: Vec<TraceRow>,
}

impl EdaOutcome {
    /// The averaged profile when available, otherwise the last iterate.
    pub fn output(&self) -> &StrategyProfile {
        self.average.as_ref().map_or(&self.last_a, |(a, _)| a)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaOutcome {
    pub last_a: StrategyProfile,
    pub last_b: StrategyProfile,
    /// Recorded row with the smallest gradient-map norm.
    pub best_stationary: Option<TraceRow>,
    /// Recorded row with the smallest exploitability.
    pub best_exploitability: Option<TraceRow>,
    pub trace: Vec<TraceRow>,
    /// Outer steps whose inner loop ended with a step larger than `1e3 × tol`.
    pub inner_nonconverged: usize,
}

impl AdaOutcome {
    pub fn output(&self) -> StrategyProfile {
        match &self.best_stationary {
            Some(row) => StrategyProfile::new(self.last_a.layout().clone(), row.profile.clone())
                .expect("recorded rows match the game layout"),
            None => self.last_a.clone(),
        }
    }
}

struct Metrics<'g, G: ?Sized> {
    game: &'g G,
    settings: TraceSettings,
    eta: f64,
    c: f64,
    started: Instant,
}

impl<G: PseudoGame + ?Sized> Metrics<'_, G> {
    fn row(&self, iteration: usize, a: &[f64], b: &[f64]) -> Result<TraceRow> {
        let exploitability = exploitability_ve(self.game, a, &self.settings.oracle)?.value;
        let moreau = evaluate_moreau(self.game, a, self.c, &self.settings.oracle, a)?;
        let gm = gradient_map(self.game.feasible_set(), a, &moreau.gradient, self.eta)?;
        Ok(TraceRow {
            iteration,
            profile: a.to_vec(),
            deviation: b.to_vec(),
            exploitability,
            grad_map_norm: norm(&gm),
            wall_time: self.started.elapsed().as_secs_f64(),
        })
    }
}

fn guard(iteration: usize, values: &[f64]) -> Result<()> {
    let n = norm(values);
    if !n.is_finite() || n > DIVERGENCE_NORM {
        return Err(GneError::Divergence { iteration, norm: n });
    }
    Ok(())
}

fn check_start<G: PseudoGame + ?Sized>(game: &G, a0: &[f64], b0: &[f64]) -> Result<()> {
    game.feasible_set().check_feasible(a0)?;
    game.feasible_set().check_feasible(b0)
}

/// Extragradient descent-ascent on `ψ` over `𝒜 × 𝒜`.
///
/// Each iteration takes a half step from `(a^t, b^t)` using the gradients
/// there, then a full step from `(a^t, b^t)` using the gradients at the half
/// point. Runs exactly `cfg.iterations` iterations.
pub fn eda_run<G: PseudoGame + ?Sized>(
    game: &G,
    cfg: &EdaConfig,
    a0: &[f64],
    b0: &[f64],
    settings: &TraceSettings,
    recorder: &mut dyn FnMut(&TraceRow),
) -> Result<EdaOutcome> {
    cfg.validate()?;
    check_start(game, a0, b0)?;
    let set = game.feasible_set();
    let dim = a0.len();
    let metrics = Metrics {
        game,
        settings: *settings,
        eta: cfg.eta,
        c: settings.metric_c.unwrap_or(DEFAULT_REGULARIZATION),
        started: Instant::now(),
    };
    let mut trace = Vec::new();
    let (mut a, mut b) = (a0.to_vec(), b0.to_vec());
    let (mut a_half, mut b_half) = (vec![0.0; dim], vec![0.0; dim]);
    let (mut ga, mut gb) = (vec![0.0; dim], vec![0.0; dim]);
    let mut step = vec![0.0; dim];
    let (mut sum_a, mut sum_b) = (vec![0.0; dim], vec![0.0; dim]);
    let mut scratch = GradScratch::new(dim);
    let total = cfg.iterations;
    if settings.records(0, total) {
        let row = metrics.row(0, &a, &b)?;
        recorder(&row);
        trace.push(row);
    }
    for t in 0..total {
        gradients_into(game, &a, &b, 0.0, &mut scratch, Some(&mut ga), Some(&mut gb))?;
        descend(set, &a, &ga, cfg.eta, &mut step, &mut a_half)?;
        descend(set, &b, &gb, -cfg.eta, &mut step, &mut b_half)?;
        gradients_into(game, &a_half, &b_half, 0.0, &mut scratch, Some(&mut ga), Some(&mut gb))?;
        descend(set, &a, &ga, cfg.eta, &mut step, &mut a_half)?;
        descend(set, &b, &gb, -cfg.eta, &mut step, &mut b_half)?;
        std::mem::swap(&mut a, &mut a_half);
        std::mem::swap(&mut b, &mut b_half);
        guard(t + 1, &a)?;
        guard(t + 1, &b)?;
        if cfg.record_average {
            sum_a.iter_mut().zip(&a).for_each(|(s, x)| *s += x);
            sum_b.iter_mut().zip(&b).for_each(|(s, x)| *s += x);
        }
        if settings.records(t + 1, total) {
            let row = metrics.row(t + 1, &a, &b)?;
            recorder(&row);
            trace.push(row);
        }
    }
    let layout = game.layout().clone();
    let average = if cfg.record_average {
        let scale = 1.0 / total as f64;
        let avg_a: Vec<f64> = sum_a.iter().map(|s| s * scale).collect();
        let avg_b: Vec<f64> = sum_b.iter().map(|s| s * scale).collect();
        // The running mean of feasible points can leave the set by rounding; snap it back.
        Some((set.project(&avg_a)?, set.project(&avg_b)?))
    } else {
        None
    };
    Ok(EdaOutcome {
        last_a: StrategyProfile::new(layout.clone(), a)?,
        last_b: StrategyProfile::new(layout, b)?,
        average,
        trace,
    })
}

/// `out = Π(x - eta g)`; pass a negative `eta` to ascend.
fn descend(
    set: &crate::feasible::FeasibleSet,
    x: &[f64],
    g: &[f64],
    eta: f64,
    step: &mut [f64],
    out: &mut [f64],
) -> Result<()> {
    for k in 0..x.len() {
        step[k] = x[k] - eta * g[k];
    }
    check_finite(step, "solver step")?;
    set.project_into(step, out)
}

/// Augmented descent-ascent: projected descent on `φ_c` using the gradient of
/// `ψ_c` at an approximate best response, recomputed each outer step by
/// `inner_iterations` projected ascent steps on `ψ_c(a^{t+1}, ·)`.
pub fn ada_run<G: PseudoGame + ?Sized>(
    game: &G,
    cfg: &AdaConfig,
    a0: &[f64],
    b0: &[f64],
    settings: &TraceSettings,
    recorder: &mut dyn FnMut(&TraceRow),
) -> Result<AdaOutcome> {
    cfg.validate()?;
    check_start(game, a0, b0)?;
    let set = game.feasible_set();
    let dim = a0.len();
    let metrics = Metrics {
        game,
        settings: *settings,
        eta: cfg.eta_a,
        c: settings.metric_c.unwrap_or(cfg.c),
        started: Instant::now(),
    };
    let inner_tol = cfg.inner_tol.unwrap_or(settings.oracle.stop_tol);
    let zero_start = set.project(&vec![0.0; dim])?.into_values();
    let mut trace = Vec::new();
    let (mut a, mut b) = (a0.to_vec(), b0.to_vec());
    let (mut g, mut next, mut step) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let mut scratch = GradScratch::new(dim);
    let mut inner_nonconverged = 0;
    let total = cfg.outer_iterations;
    if settings.records(0, total) {
        let row = metrics.row(0, &a, &b)?;
        recorder(&row);
        trace.push(row);
    }
    for t in 0..total {
        gradients_into(game, &a, &b, cfg.c, &mut scratch, Some(&mut g), None)?;
        descend(set, &a, &g, cfg.eta_a, &mut step, &mut next)?;
        std::mem::swap(&mut a, &mut next);
        guard(t + 1, &a)?;

        if cfg.inner_init == InnerInit::ZeroProjected {
            b.copy_from_slice(&zero_start);
        }
        let mut moved = f64::INFINITY;
        for _ in 0..cfg.inner_iterations {
            gradients_into(game, &a, &b, cfg.c, &mut scratch, None, Some(&mut g))?;
            descend(set, &b, &g, -cfg.eta_b, &mut step, &mut next)?;
            moved = dist(&b, &next);
            std::mem::swap(&mut b, &mut next);
            if cfg.inner_tol.is_some_and(|tol| moved <= tol) {
                break;
            }
        }
        guard(t + 1, &b)?;
        if moved > 1e3 * inner_tol {
            inner_nonconverged += 1;
        }
        if settings.records(t + 1, total) {
            let row = metrics.row(t + 1, &a, &b)?;
            recorder(&row);
            trace.push(row);
        }
    }
    let best_stationary = trace.iter().min_by(|x, y| x.grad_map_norm.total_cmp(&y.grad_map_norm)).cloned();
    let best_exploitability = trace.iter().min_by(|x, y| x.exploitability.total_cmp(&y.exploitability)).cloned();
    let layout = game.layout().clone();
    Ok(AdaOutcome {
        last_a: StrategyProfile::new(layout.clone(), a)?,
        last_b: StrategyProfile::new(layout, b)?,
        best_stationary,
        best_exploitability,
        trace,
        inner_nonconverged,
    })
}

/// Inner-loop length that keeps the ADA gradient error below `epsilon`.
///
/// Projected ascent with step `1/L_c` on a `c`-strongly concave, `L_c`-smooth
/// objective shrinks the optimality gap by `1 - c/L_c` per step. Starting from
/// a gap of at most `gap_bound`, quadratic growth turns the gap into a distance
/// bound, and `L_c`-smoothness turns that into a gradient error bound:
/// `L_c (1 - c/L_c)^{T/2} √(2 gap_bound / c) <= ε`, i.e.
/// `T >= 2 ln((ε / L_c) √(c / (2 gap_bound))) / ln(1 - c / L_c)`.
pub fn error_bound_inner_iterations(smoothness_c: f64, c: f64, gap_bound: f64, epsilon: f64) -> usize {
    let numerator = 2.0 * ((epsilon / smoothness_c) * (c / (2.0 * gap_bound)).sqrt()).ln();
    let denominator = (-c / smoothness_c).ln_1p();
    ceil_count(numerator / denominator)
}

/// The same bound written with the rate `c/L_c` in place of `1 - c/L_c` and
/// `√(2c / gap_bound)` in place of `√(c / (2 gap_bound))`. Far smaller than
/// [`error_bound_inner_iterations`]; kept for comparison only, it does not
/// bound the gradient error.
pub fn fast_rate_inner_iterations(smoothness_c: f64, c: f64, gap_bound: f64, epsilon: f64) -> usize {
    let numerator = 2.0 * ((epsilon / smoothness_c) * (2.0 * c / gap_bound).sqrt()).ln();
    let denominator = (c / smoothness_c).ln();
    ceil_count(numerator / denominator)
}

fn ceil_count(t: f64) -> usize {
    let t = t.ceil();
    if t.is_finite() && t >= 1.0 {
        t as usize
    } else {
        1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum StepDefaults {
    Eda { eta: f64 },
    Ada { eta_a: f64, eta_b: f64, inner_iterations: usize },
}

/// Step sizes derived from the game's smoothness constants.
///
/// EDA: `η = 0.999 / L`. ADA: `η_a = 1 / (L_c + L_c²/c)`, `η_b = 1 / L_c` with
/// `L_c = L + c`, and the inner-loop length from the error bound at `ε = 1e-3`.
/// Games that publish empirical step sizes use those instead.
pub fn default_steps<G: PseudoGame + ?Sized>(game: &G, algorithm: Algorithm, c: Option<f64>) -> Result<StepDefaults> {
    let smoothness = game.lipschitz().grad_smoothness;
    let overrides = game.step_overrides();
    match algorithm {
        Algorithm::Eda => {
            let eta = overrides.map_or_else(|| 0.999 / smoothness, |o| o.eda);
            Ok(StepDefaults::Eda { eta })
        }
        Algorithm::Ada => {
            let c = c.ok_or_else(|| GneError::InvalidParameter("ADA step sizes need a regularization c".into()))?;
            if !(c > 0.0 && c.is_finite()) {
                return Err(GneError::InvalidParameter(format!("regularization must be > 0, got {c}")));
            }
            let lc = smoothness + c;
            let inner_iterations =
                error_bound_inner_iterations(lc, c, inner_gap_bound(game, c), DEFAULT_INNER_EPSILON);
            let (eta_a, eta_b) = match overrides {
                Some(o) => (o.ada_outer, o.ada_inner),
                None => (1.0 / (lc + lc * lc / c), 1.0 / lc),
            };
            Ok(StepDefaults::Ada { eta_a, eta_b, inner_iterations })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum SolverConfig {
    Eda(EdaConfig),
    Ada(AdaConfig),
}

impl SolverConfig {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            SolverConfig::Eda(_) => Algorithm::Eda,
            SolverConfig::Ada(_) => Algorithm::Ada,
        }
    }

    pub fn iterations(&self) -> usize {
        match self {
            SolverConfig::Eda(cfg) => cfg.iterations,
            SolverConfig::Ada(cfg) => cfg.outer_iterations,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestartPolicy {
    pub max_restarts: usize,
    /// A run counts as converged once its output's exploitability is at most this.
    pub threshold: f64,
}

impl Default for RestartPolicy {
    fn default() -> Self {
        Self { max_restarts: 20, threshold: 1e-2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub restart_index: usize,
    pub start: StrategyProfile,
    /// Averaged profile for EDA, best-stationarity profile for ADA.
    pub output: StrategyProfile,
    pub final_exploitability: f64,
    pub best_grad_map_norm: Option<f64>,
    pub trace: Vec<TraceRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartOutcome {
    pub runs: Vec<RunOutcome>,
    /// Index into `runs` of the lowest final exploitability.
    pub best: usize,
    pub restarts: usize,
    pub converged: bool,
}

impl RestartOutcome {
    pub fn best_run(&self) -> &RunOutcome {
        &self.runs[self.best]
    }
}

/// Runs the solver from fresh random feasible starts (with `b⁰ = a⁰`) until a
/// run's output is within `policy.threshold` of zero exploitability or
/// `policy.max_restarts` restarts have been spent.
pub fn restart_solve<G: PseudoGame + ?Sized, R: Rng + ?Sized>(
    game: &G,
    solver: &SolverConfig,
    policy: &RestartPolicy,
    settings: &TraceSettings,
    rng: &mut R,
) -> Result<RestartOutcome> {
    if policy.threshold.is_nan() {
        return Err(GneError::InvalidParameter("restart threshold is NaN".into()));
    }
    let mut runs = Vec::new();
    let mut converged = false;
    for restart_index in 0..=policy.max_restarts {
        let start = game.feasible_set().random_feasible(rng);
        let (output, trace) = match solver {
            SolverConfig::Eda(cfg) => {
                let out = eda_run(game, cfg, &start, &start, settings, &mut |_| {})?;
                (out.output().clone(), out.trace)
            }
            SolverConfig::Ada(cfg) => {
                let out = ada_run(game, cfg, &start, &start, settings, &mut |_| {})?;
                (out.output(), out.trace)
            }
        };
        let final_exploitability = exploitability_ve(game, &output, &settings.oracle)?.value;
        let best_grad_map_norm = trace.iter().map(|r| r.grad_map_norm).min_by(f64::total_cmp);
        runs.push(RunOutcome { restart_index, start, output, final_exploitability, best_grad_map_norm, trace });
        if final_exploitability <= policy.threshold {
            converged = true;
            break;
        }
    }
    let best = runs
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.final_exploitability.total_cmp(&y.1.final_exploitability))
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(RestartOutcome { restarts: runs.len() - 1, runs, best, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasible::{BoxBounds, FeasibleSet, JointConstraint};
    use crate::games::{make_benchmark, ConstraintKind, GameFamily, GameSpec, Payoff};
    use crate::profile::{Matrix, ProfileLayout};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn zero_sum_1d() -> GameSpec {
        let feasible = FeasibleSet::new(
            ProfileLayout::uniform(2, 1).unwrap(),
            BoxBounds::uniform(2, -10.0, 10.0).unwrap(),
            JointConstraint::AffineHalfspace { w: vec![1.0, 1.0], r: 1.0 },
        )
        .unwrap();
        GameSpec::new(Payoff::BilinearZeroSum { q: Matrix::from_rows(&[vec![1.0]]).unwrap() }, feasible).unwrap()
    }

    fn diag_zero_sum(entries: &[f64]) -> GameSpec {
        let m = entries.len();
        let feasible = FeasibleSet::new(
            ProfileLayout::uniform(2, m).unwrap(),
            BoxBounds::uniform(2 * m, -10.0, 10.0).unwrap(),
            JointConstraint::AffineHalfspace { w: vec![1.0; 2 * m], r: 1.0 },
        )
        .unwrap();
        GameSpec::new(Payoff::BilinearZeroSum { q: Matrix::diag(entries).unwrap() }, feasible).unwrap()
    }

    #[test]
    fn eda_stays_at_the_origin() {
        let g = zero_sum_1d();
        let out = eda_run(&g, &EdaConfig::new(0.5, 20), &[0.0, 0.0], &[0.0, 0.0], &TraceSettings::for_iterations(20), &mut |_| {})
            .unwrap();
        assert_eq!(out.last_a.values(), &[0.0, 0.0]);
        assert_eq!(out.output().values(), &[0.0, 0.0]);
        assert!(out.trace.iter().all(|r| r.exploitability == 0.0));
        assert_eq!(out.trace.len(), 21);
    }

    #[test]
    fn eda_half_step_by_hand() {
        // ∇_a ψ((1,0),(0,1)) = (-1, 0) and ∇_b ψ = (0, -1), so the half point is
        // a = (1.1, 0), b = (0, 0.9). Gradients there are (-0.9, 0) and (0, -1.1),
        // giving a = (1.09, 0), b = (0, 0.89). No joint constraint, so every
        // projection is the identity.
        let feasible = FeasibleSet::new(
            ProfileLayout::uniform(2, 1).unwrap(),
            BoxBounds::uniform(2, -10.0, 10.0).unwrap(),
            JointConstraint::None,
        )
        .unwrap();
        let g = GameSpec::new(Payoff::BilinearZeroSum { q: Matrix::from_rows(&[vec![1.0]]).unwrap() }, feasible).unwrap();
        let out = eda_run(&g, &EdaConfig::new(0.1, 1), &[1.0, 0.0], &[0.0, 1.0], &TraceSettings::disabled(), &mut |_| {})
            .unwrap();
        assert!(dist(&out.last_a, &[1.09, 0.0]) < 1e-15);
        assert!(dist(&out.last_b, &[0.0, 0.89]) < 1e-15);
    }

    #[test]
    fn ada_stays_at_the_origin() {
        let g = zero_sum_1d();
        let cfg = AdaConfig {
            eta_a: 0.05,
            eta_b: 0.9,
            c: 0.1,
            outer_iterations: 10,
            inner_iterations: 5,
            inner_init: InnerInit::ZeroProjected,
            inner_tol: None,
        };
        let out = ada_run(&g, &cfg, &[0.0, 0.0], &[0.0, 0.0], &TraceSettings::for_iterations(10), &mut |_| {}).unwrap();
        assert!(norm(&out.last_a) <= 1e-6);
        assert_eq!(out.best_stationary.unwrap().grad_map_norm, 0.0);
    }

    #[test]
    fn default_step_rules() {
        let g = diag_zero_sum(&[3.0, 4.0]);
        match default_steps(&g, Algorithm::Eda, None).unwrap() {
            StepDefaults::Eda { eta } => assert!((eta - 0.24975).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        let unit = zero_sum_1d();
        match default_steps(&unit, Algorithm::Ada, Some(0.1)).unwrap() {
            StepDefaults::Ada { eta_a, eta_b, .. } => {
                assert!((eta_a - 1.0 / 13.2).abs() < 1e-12);
                assert!((eta_b - 1.0 / 1.1).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        assert!(default_steps(&unit, Algorithm::Ada, None).is_err());

        let nm = make_benchmark(GameFamily::MonotoneNormMin, 5, 10, ConstraintKind::Affine, 3).unwrap();
        assert_eq!(default_steps(&nm, Algorithm::Eda, None).unwrap(), StepDefaults::Eda { eta: 0.02 });
        match default_steps(&nm, Algorithm::Ada, Some(0.1)).unwrap() {
            StepDefaults::Ada { eta_a, eta_b, .. } => assert_eq!((eta_a, eta_b), (0.02, 0.05)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn error_bound_formula() {
        // 2 ln((1e-3/1.1)·√(0.1/200)) / ln(1 - 0.1/1.1) = 2·(-10.803)/(-0.09531) → 226.7
        assert_eq!(error_bound_inner_iterations(1.1, 0.1, 100.0, 1e-3), 227);
        assert_eq!(error_bound_inner_iterations(1.1, 0.1, 1e-12, 1e3), 1);
        // 2 ln((1e-3/1.1)·√(0.2/100)) / ln(0.1/1.1) = 2·(-10.111)/(-2.3979) → 8.43
        assert_eq!(fast_rate_inner_iterations(1.1, 0.1, 100.0, 1e-3), 9);
    }

    #[test]
    fn restart_with_infinite_threshold_runs_once() {
        let g = make_benchmark(GameFamily::BilinearZeroSum, 2, 3, ConstraintKind::Affine, 5).unwrap();
        let solver = SolverConfig::Eda(EdaConfig::new(0.1, 5));
        let policy = RestartPolicy { max_restarts: 20, threshold: f64::INFINITY };
        let out = restart_solve(&g, &solver, &policy, &TraceSettings::disabled(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(out.restarts, 0);
        assert_eq!(out.runs.len(), 1);
        assert!(out.converged);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let g = zero_sum_1d();
        let origin = [0.0, 0.0];
        let settings = TraceSettings::disabled();
        assert!(eda_run(&g, &EdaConfig::new(0.0, 3), &origin, &origin, &settings, &mut |_| {}).is_err());
        assert!(eda_run(&g, &EdaConfig::new(0.1, 0), &origin, &origin, &settings, &mut |_| {}).is_err());
        assert!(matches!(
            eda_run(&g, &EdaConfig::new(0.1, 1), &[1.0, 1.0], &origin, &settings, &mut |_| {}),
            Err(GneError::Infeasible { .. })
        ));
    }
}
