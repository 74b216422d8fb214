//! Cumulative regret, its regularized form, exploitability oracles and the
//! projected gradient operator.
//!
//! With `ψ(a, b) = Σ_i u_i(b_i, a_{-i}) - u_i(a)` the VE exploitability is
//! `φ(a) = max_{b ∈ 𝒜} ψ(a, b)`. The regularized variant subtracts
//! `(c/2)‖a - b‖²`, which makes the inner problem `c`-strongly concave and
//! `φ_c` differentiable with `∇φ_c(a) = ∇_a ψ(a, b*) - c(a - b*)`.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_len, GneError, Result};
use crate::feasible::FeasibleSet;
use crate::games::PseudoGame;
use crate::profile::{dist, mix_into, StrategyProfile};

#[derive(Debug, Clone, PartialEq)]
pub struct RegretGradient {
    /// `∇_a ψ_c(a, b)`
    pub wrt_a: Vec<f64>,
    /// `∇_b ψ_c(a, b)`
    pub wrt_b: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExploitabilityFlavor {
    Ve,
    Gne,
    RegularizedVe { c: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExploitabilityReport {
    pub value: f64,
    /// The maximizing deviation profile `b*`.
    pub maximizer: StrategyProfile,
    pub flavor: ExploitabilityFlavor,
    pub inner_iterations: usize,
    /// Norm of the final ascent step (gradient-map norm of the inner problem).
    pub residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// `1 / L` of the inner objective.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub max_iterations: usize,
    pub step: StepRule,
    pub stop_tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { max_iterations: 5000, step: StepRule::Auto, stop_tol: 1e-10 }
    }
}

impl OracleConfig {
    pub fn with_tol(mut self, stop_tol: f64) -> Self {
        self.stop_tol = stop_tol;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 || self.stop_tol.is_nan() || self.stop_tol <= 0.0 {
            return Err(GneError::InvalidParameter("oracle needs max_iterations > 0 and stop_tol > 0".into()));
        }
        if let StepRule::Fixed(s) = self.step {
            if !(s > 0.0 && s.is_finite()) {
                return Err(GneError::InvalidParameter(format!("oracle step must be positive, got {s}")));
            }
        }
        Ok(())
    }

    fn step_for(&self, smoothness: f64) -> f64 {
        match self.step {
            StepRule::Fixed(s) => s,
            StepRule::Auto => 1.0 / smoothness,
        }
    }
}

/// Value of `φ_c` together with its gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct MoreauEvaluation {
    pub report: ExploitabilityReport,
    pub gradient: Vec<f64>,
}

fn check_pair<G: PseudoGame + ?Sized>(game: &G, a: &[f64], b: &[f64]) -> Result<()> {
    game.layout().check_profile(a)?;
    game.layout().check_profile(b)
}

fn check_regularization(c: f64) -> Result<()> {
    if c >= 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(GneError::InvalidParameter(format!("regularization must be >= 0, got {c}")))
    }
}

/// `ψ(a, b)`
pub fn cumulative_regret<G: PseudoGame + ?Sized>(game: &G, a: &[f64], b: &[f64]) -> Result<f64> {
    check_pair(game, a, b)?;
    let mut mixed = vec![0.0; a.len()];
    let mut total = 0.0;
    for i in 0..game.num_players() {
        mix_into(game.layout(), a, i, b, &mut mixed);
        total += game.utility(i, &mixed)? - game.utility(i, a)?;
    }
    Ok(total)
}

/// `ψ_c(a, b) = ψ(a, b) - (c/2)‖a - b‖²`
pub fn regularized_regret<G: PseudoGame + ?Sized>(game: &G, a: &[f64], b: &[f64], c: f64) -> Result<f64> {
    check_regularization(c)?;
    let d = dist(a, b);
    Ok(cumulative_regret(game, a, b)? - 0.5 * c * d * d)
}

/// Both partial gradients of `ψ_c`.
///
/// Block `i` of `∇_b` is `∇_{b_i} u_i(b_i, a_{-i}) + c(a_i - b_i)`; block `j` of
/// `∇_a` is `Σ_{i≠j} ∇_{a_j} u_i(b_i, a_{-i}) - Σ_i ∇_{a_j} u_i(a) - c(a_j - b_j)`.
pub fn regret_gradients<G: PseudoGame + ?Sized>(game: &G, a: &[f64], b: &[f64], c: f64) -> Result<RegretGradient> {
    check_pair(game, a, b)?;
    check_regularization(c)?;
    let mut out = RegretGradient { wrt_a: vec![0.0; a.len()], wrt_b: vec![0.0; a.len()] };
    let mut scratch = GradScratch::new(a.len());
    gradients_into(game, a, b, c, &mut scratch, Some(&mut out.wrt_a), Some(&mut out.wrt_b))?;
    Ok(out)
}

pub(crate) struct GradScratch {
    mixed: Vec<f64>,
    grad: Vec<f64>,
}

impl GradScratch {
    pub(crate) fn new(len: usize) -> Self {
        Self { mixed: vec![0.0; len], grad: vec![0.0; len] }
    }
}

/// Fills whichever of `∇_a ψ_c` / `∇_b ψ_c` is requested.
pub(crate) fn gradients_into<G: PseudoGame + ?Sized>(
    game: &G,
    a: &[f64],
    b: &[f64],
    c: f64,
    scratch: &mut GradScratch,
    mut wrt_a: Option<&mut [f64]>,
    mut wrt_b: Option<&mut [f64]>,
) -> Result<()> {
    let layout = game.layout();
    if let Some(ga) = wrt_a.as_deref_mut() {
        ga.iter_mut().for_each(|g| *g = 0.0);
    }
    for i in 0..layout.num_players() {
        let own = layout.range(i);
        mix_into(layout, a, i, b, &mut scratch.mixed);
        game.utility_gradient(i, &scratch.mixed, &mut scratch.grad)?;
        if let Some(gb) = wrt_b.as_deref_mut() {
            for k in own.clone() {
                gb[k] = scratch.grad[k] + c * (a[k] - b[k]);
            }
        }
        if let Some(ga) = wrt_a.as_deref_mut() {
            for (k, g) in ga.iter_mut().enumerate() {
                if !own.contains(&k) {
                    *g += scratch.grad[k];
                }
            }
            game.utility_gradient(i, a, &mut scratch.grad)?;
            for (g, h) in ga.iter_mut().zip(&scratch.grad) {
                *g -= h;
            }
        }
    }
    if let Some(ga) = wrt_a {
        for k in 0..a.len() {
            ga[k] -= c * (a[k] - b[k]);
        }
    }
    Ok(())
}

/// `G_η(a) = a - Π_𝒜[a - η g]`
pub fn gradient_map(set: &FeasibleSet, a: &[f64], g: &[f64], eta: f64) -> Result<Vec<f64>> {
    set.layout().check_profile(a)?;
    check_len(a.len(), g.len())?;
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(GneError::InvalidParameter(format!("eta must be positive, got {eta}")));
    }
    let stepped: Vec<f64> = a.iter().zip(g).map(|(x, d)| x - eta * d).collect();
    let projected = set.project(&stepped)?;
    Ok(a.iter().zip(projected.values()).map(|(x, p)| x - p).collect())
}

/// Upper bound on `max_{a,b} ψ_c(a, b) - ψ_c(a, 0)` used to size the ADA inner loop:
/// `L_ψ·D + (c/2)·D²` with `D` the box diameter.
pub fn inner_gap_bound<G: PseudoGame + ?Sized>(game: &G, c: f64) -> f64 {
    let diameter = game.feasible_set().bounds().diameter();
    game.lipschitz().value_lipschitz * diameter + 0.5 * c * diameter * diameter
}

const STEP_GROWTH_CAP: f64 = 1e6;

pub(crate) struct AscentOutcome {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

type GradientFn<'a> = dyn FnMut(&[f64], &mut [f64]) -> Result<()> + 'a;

/// Projected gradient ascent for concave objectives that are separable across
/// `blocks`, with one adaptive step per block.
///
/// A trial step `x⁺ = Π_S[x + S g(x)]`, with `S` the diagonal of block steps
/// `η_i` and `Π_S` the projection in the metric `S⁻¹`, is accepted when every
/// block satisfies `(g_i(x) - g_i(x⁺))·d_i <= ‖d_i‖²/(2η_i)`; by concavity and
/// separability this gives `f(x⁺) >= f(x) + Σ_i ‖d_i‖²/(2η_i)`. Only failing
/// blocks are halved, so a kink in one block does not freeze the others.
/// Accepted steps double every `η_i`, up to `STEP_GROWTH_CAP` times the
/// nominal step, so flat (e.g. linear) objectives are not crawled across at
/// `1/L`. Stops once `‖d‖` drops to `stop_tol`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn projected_ascent(
    set: &FeasibleSet,
    blocks: &[Range<usize>],
    start: &[f64],
    step: f64,
    max_iterations: usize,
    stop_tol: f64,
    value: &mut dyn FnMut(&[f64]) -> Result<f64>,
    gradient: &mut GradientFn,
) -> Result<AscentOutcome> {
    let dim = start.len();
    let mut x = vec![0.0; dim];
    set.project_into(start, &mut x)?;
    let mut g = vec![0.0; dim];
    let mut g_next = vec![0.0; dim];
    let mut trial = vec![0.0; dim];
    let mut candidate = vec![0.0; dim];
    let mut scale = vec![step; dim];
    let mut etas = vec![step; blocks.len()];
    gradient(&x, &mut g)?;
    check_finite(&g, "ascent gradient")?;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    'outer: while iterations < max_iterations {
        loop {
            for (block, eta) in blocks.iter().zip(&etas) {
                for k in block.clone() {
                    scale[k] = *eta;
                    trial[k] = x[k] + eta * g[k];
                }
            }
            if etas.iter().all(|e| *e == etas[0]) {
                set.project_into(&trial, &mut candidate)?;
            } else {
                set.project_scaled_into(&trial, &scale, &mut candidate)?;
            }
            residual = dist(&candidate, &x);
            if residual <= stop_tol {
                converged = true;
                break 'outer;
            }
            gradient(&candidate, &mut g_next)?;
            check_finite(&g_next, "ascent gradient")?;
            let mut accepted = true;
            for (block, eta) in blocks.iter().zip(etas.iter_mut()) {
                let (mut curvature, mut moved) = (0.0, 0.0);
                for k in block.clone() {
                    let d = candidate[k] - x[k];
                    curvature += (g[k] - g_next[k]) * d;
                    moved += d * d;
                }
                if curvature > moved / (2.0 * *eta) {
                    *eta *= 0.5;
                    accepted = false;
                }
            }
            if accepted {
                std::mem::swap(&mut x, &mut candidate);
                std::mem::swap(&mut g, &mut g_next);
                for eta in etas.iter_mut() {
                    *eta = (2.0 * *eta).min(step * STEP_GROWTH_CAP);
                }
                break;
            }
            if etas.iter().any(|e| *e < step * 1e-14) {
                break 'outer;
            }
        }
        iterations += 1;
    }
    let value = value(&x)?;
    Ok(AscentOutcome { point: x, value, iterations, residual, converged })
}

fn ve_ascent<G: PseudoGame + ?Sized>(
    game: &G,
    a: &[f64],
    c: f64,
    start: &[f64],
    cfg: &OracleConfig,
) -> Result<AscentOutcome> {
    let step = cfg.step_for(game.lipschitz().grad_smoothness + c);
    let mut scratch = GradScratch::new(a.len());
    let blocks: Vec<_> = (0..game.layout().num_players()).map(|i| game.layout().range(i)).collect();
    projected_ascent(
        game.feasible_set(),
        &blocks,
        start,
        step,
        cfg.max_iterations,
        cfg.stop_tol,
        &mut |b| regularized_regret(game, a, b, c),
        &mut |b, out| gradients_into(game, a, b, c, &mut scratch, None, Some(out)),
    )
}

fn report<G: PseudoGame + ?Sized>(
    game: &G,
    outcome: AscentOutcome,
    flavor: ExploitabilityFlavor,
) -> Result<ExploitabilityReport> {
    Ok(ExploitabilityReport {
        value: outcome.value,
        maximizer: StrategyProfile::new(game.layout().clone(), outcome.point)?,
        flavor,
        inner_iterations: outcome.iterations,
        residual: outcome.residual,
        converged: outcome.converged,
    })
}

/// VE exploitability `max_{b ∈ 𝒜} ψ(a, b)`, by projected ascent warm-started at `a`.
pub fn exploitability_ve<G: PseudoGame + ?Sized>(game: &G, a: &[f64], cfg: &OracleConfig) -> Result<ExploitabilityReport> {
    cfg.validate()?;
    game.feasible_set().check_feasible(a)?;
    let outcome = ve_ascent(game, a, 0.0, a, cfg)?;
    report(game, outcome, ExploitabilityFlavor::Ve)
}

/// GNE exploitability `Σ_i max_{b_i ∈ 𝒜_i(a_{-i})} r_i(a_i, b_i; a_{-i})`, one
/// ascent per player over that player's slice of the feasible set.
pub fn exploitability_gne<G: PseudoGame + ?Sized>(game: &G, a: &[f64], cfg: &OracleConfig) -> Result<ExploitabilityReport> {
    cfg.validate()?;
    let set = game.feasible_set();
    set.check_feasible(a)?;
    let layout = game.layout();
    let step = cfg.step_for(game.lipschitz().grad_smoothness);
    let mut maximizer = a.to_vec();
    let mut mixed = a.to_vec();
    let mut full_grad = vec![0.0; a.len()];
    let (mut total, mut iterations, mut residual, mut converged) = (0.0, 0, 0.0_f64, true);
    for i in 0..layout.num_players() {
        let range = layout.range(i);
        let slice = set.slice(i, a)?;
        let base = game.utility(i, a)?;
        let outcome = projected_ascent(
            &slice,
            std::slice::from_ref(&(0..range.len())),
            &a[range.clone()],
            step,
            cfg.max_iterations,
            cfg.stop_tol,
            &mut |bi| {
                mixed.copy_from_slice(a);
                mixed[range.clone()].copy_from_slice(bi);
                Ok(game.utility(i, &mixed)? - base)
            },
            &mut |bi, out| {
                let mut probe = a.to_vec();
                probe[range.clone()].copy_from_slice(bi);
                game.utility_gradient(i, &probe, &mut full_grad)?;
                out.copy_from_slice(&full_grad[range.clone()]);
                Ok(())
            },
        )?;
        maximizer[range.clone()].copy_from_slice(&outcome.point);
        total += outcome.value;
        iterations += outcome.iterations;
        residual = residual.max(outcome.residual);
        converged &= outcome.converged;
    }
    Ok(ExploitabilityReport {
        value: total,
        maximizer: StrategyProfile::new(layout.clone(), maximizer)?,
        flavor: ExploitabilityFlavor::Gne,
        inner_iterations: iterations,
        residual,
        converged,
    })
}

/// `φ_c(a)` and `∇φ_c(a)`; fails if the inner solve does not reach `stop_tol`.
pub fn regularized_exploitability<G: PseudoGame + ?Sized>(
    game: &G,
    a: &[f64],
    c: f64,
    cfg: &OracleConfig,
) -> Result<MoreauEvaluation> {
    regularized_exploitability_from(game, a, c, cfg, a)
}

/// As [`regularized_exploitability`], with the inner ascent started at `start`.
pub fn regularized_exploitability_from<G: PseudoGame + ?Sized>(
    game: &G,
    a: &[f64],
    c: f64,
    cfg: &OracleConfig,
    start: &[f64],
) -> Result<MoreauEvaluation> {
    let eval = evaluate_moreau(game, a, c, cfg, start)?;
    if !eval.report.converged {
        return Err(GneError::NonConvergence { iterations: eval.report.inner_iterations, residual: eval.report.residual });
    }
    Ok(eval)
}

/// Moreau evaluation that reports non-convergence through the `converged` flag.
pub(crate) fn evaluate_moreau<G: PseudoGame + ?Sized>(
    game: &G,
    a: &[f64],
    c: f64,
    cfg: &OracleConfig,
    start: &[f64],
) -> Result<MoreauEvaluation> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(GneError::InvalidParameter(format!("regularization must be > 0, got {c}")));
    }
    cfg.validate()?;
    check_pair(game, a, start)?;
    check_finite(a, "strategy profile")?;
    let outcome = ve_ascent(game, a, c, start, cfg)?;
    let mut gradient = vec![0.0; a.len()];
    let mut scratch = GradScratch::new(a.len());
    gradients_into(game, a, &outcome.point, c, &mut scratch, Some(&mut gradient), None)?;
    let report = report(game, outcome, ExploitabilityFlavor::RegularizedVe { c })?;
    Ok(MoreauEvaluation { report, gradient })
}
