//! Pseudo-games: utilities with closed-form gradients at arbitrary profiles,
//! and the benchmark families used in the experiments.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, GneError, Result};
use crate::feasible::{BoxBounds, FeasibleSet, JointConstraint};
use crate::profile::{norm, Matrix, ProfileLayout};

/// Residual norms below this are treated as the kink of `‖·‖`; the zero subgradient is returned there.
pub const NORM_KINK_TOL: f64 = 1e-12;

/// Box half-width of every benchmark action space.
pub const BENCHMARK_BOX: f64 = 10.0;

/// Smoothness constants feeding the step-size rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzEstimate {
    /// Lipschitz constant of `∇ψ`.
    pub grad_smoothness: f64,
    /// Lipschitz constant of `ψ` itself over the action space.
    pub value_lipschitz: f64,
    /// Set when `grad_smoothness` is an empirical surrogate rather than a bound.
    pub empirical: bool,
}

/// Hand-tuned step sizes for games whose smoothness constant is only a surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepOverrides {
    pub eda: f64,
    pub ada_outer: f64,
    pub ada_inner: f64,
}

/// A pseudo-game with jointly convex constraints.
///
/// Gradients are full-profile: `utility_gradient(i, a, out)` writes `∇_a u_i(a)`
/// for every block, which is what the regret gradients need at mixed profiles.
pub trait PseudoGame: Send + Sync {
    fn feasible_set(&self) -> &FeasibleSet;

    fn utility(&self, player: usize, a: &[f64]) -> Result<f64>;

    fn utility_gradient(&self, player: usize, a: &[f64], out: &mut [f64]) -> Result<()>;

    fn lipschitz(&self) -> LipschitzEstimate;

    fn step_overrides(&self) -> Option<StepOverrides> {
        None
    }

    fn layout(&self) -> &ProfileLayout {
        self.feasible_set().layout()
    }

    fn num_players(&self) -> usize {
        self.layout().num_players()
    }

    /// `∇_{a_j} u_i(a)`
    fn utility_grad(&self, player: usize, a: &[f64], wrt: usize) -> Result<Vec<f64>> {
        self.layout().check_player(wrt)?;
        let mut full = vec![0.0; a.len()];
        self.utility_gradient(player, a, &mut full)?;
        Ok(full[self.layout().range(wrt)].to_vec())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GameFamily {
    BilinearZeroSum,
    BilinearGeneralSum,
    MonotoneNormMin,
}

impl GameFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            GameFamily::BilinearZeroSum => "bilinear-zs",
            GameFamily::BilinearGeneralSum => "bilinear-gs",
            GameFamily::MonotoneNormMin => "monotone",
        }
    }
}

impl fmt::Display for GameFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GameFamily {
    type Err = GneError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bilinear-zs" | "bilinear-zero-sum" => Ok(GameFamily::BilinearZeroSum),
            "bilinear-gs" | "bilinear-general-sum" => Ok(GameFamily::BilinearGeneralSum),
            "monotone" | "monotone-norm-min" => Ok(GameFamily::MonotoneNormMin),
            other => Err(GneError::InvalidParameter(format!("unknown game family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintKind {
    /// `1 - Σ a >= 0`
    Affine,
    /// `1 - ‖a‖² >= 0`
    Ball,
}

impl ConstraintKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ConstraintKind::Affine => "affine",
            ConstraintKind::Ball => "ball",
        }
    }
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConstraintKind {
    type Err = GneError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "affine" => Ok(ConstraintKind::Affine),
            "ball" => Ok(ConstraintKind::Ball),
            other => Err(GneError::InvalidParameter(format!("unknown constraint `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Payoff {
    /// `u_1 = a_1ᵀ Q a_2 = -u_2`
    BilinearZeroSum { q: Matrix },
    /// `u_1 = a_1ᵀ Q_1 a_2`, `u_2 = a_1ᵀ Q_2 a_2`
    BilinearGeneralSum { q1: Matrix, q2: Matrix },
    /// `u_i = -‖Σ_j a_j - s_i‖`
    MonotoneNormMin { shifts: Vec<Vec<f64>> },
}

impl Payoff {
    pub fn family(&self) -> GameFamily {
        match self {
            Payoff::BilinearZeroSum { .. } => GameFamily::BilinearZeroSum,
            Payoff::BilinearGeneralSum { .. } => GameFamily::BilinearGeneralSum,
            Payoff::MonotoneNormMin { .. } => GameFamily::MonotoneNormMin,
        }
    }
}

/// A concrete benchmark pseudo-game. Serializes to a self-contained JSON
/// document holding the explicit matrices and shifts, so a run can be replayed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GameDocument", into = "GameDocument")]
pub struct GameSpec {
    payoff: Payoff,
    feasible: FeasibleSet,
    constraint: Option<ConstraintKind>,
    seed: Option<u64>,
    lipschitz: LipschitzEstimate,
}

#[derive(Serialize, Deserialize)]
struct GameDocument {
    num_players: usize,
    dim: usize,
    constraint: Option<ConstraintKind>,
    seed: Option<u64>,
    payoff: Payoff,
    feasible: FeasibleSet,
}

impl TryFrom<GameDocument> for GameSpec {
    type Error = GneError;

    fn try_from(doc: GameDocument) -> Result<Self> {
        let mut spec = GameSpec::new(doc.payoff, doc.feasible)?;
        if spec.num_players() != doc.num_players || spec.layout().dim(0) != doc.dim {
            return Err(GneError::InvalidParameter("document shape disagrees with its payoff data".into()));
        }
        spec.constraint = doc.constraint;
        spec.seed = doc.seed;
        Ok(spec)
    }
}

impl From<GameSpec> for GameDocument {
    fn from(spec: GameSpec) -> Self {
        GameDocument {
            num_players: spec.num_players(),
            dim: spec.layout().dim(0),
            constraint: spec.constraint,
            seed: spec.seed,
            payoff: spec.payoff,
            feasible: spec.feasible,
        }
    }
}

impl GameSpec {
    pub fn new(payoff: Payoff, feasible: FeasibleSet) -> Result<Self> {
        let layout = feasible.layout();
        let n = layout.num_players();
        let m = layout.dim(0);
        if layout.dims().iter().any(|&d| d != m) {
            return Err(GneError::InvalidParameter("benchmark games need a uniform block size".into()));
        }
        let square = |q: &Matrix| -> Result<()> {
            if q.rows() == m && q.cols() == m {
                Ok(())
            } else {
                Err(GneError::InvalidParameter(format!(
                    "payoff matrix is {}x{}, expected {m}x{m}",
                    q.rows(),
                    q.cols()
                )))
            }
        };
        let diameter = feasible.bounds().diameter();
        let lipschitz = match &payoff {
            Payoff::BilinearZeroSum { q } => {
                require_two_players(n)?;
                square(q)?;
                let l = q.spectral_norm()?;
                LipschitzEstimate { grad_smoothness: l, value_lipschitz: l * diameter, empirical: false }
            }
            Payoff::BilinearGeneralSum { q1, q2 } => {
                require_two_players(n)?;
                square(q1)?;
                square(q2)?;
                let l = q1.spectral_norm()? + q2.spectral_norm()?;
                LipschitzEstimate { grad_smoothness: l, value_lipschitz: l * diameter, empirical: false }
            }
            Payoff::MonotoneNormMin { shifts } => {
                check_len(n, shifts.len())?;
                for s in shifts {
                    check_len(m, s.len())?;
                    crate::error::check_finite(s, "shift")?;
                }
                // ∇ψ has unit-norm pieces: one per b-block, at most 2n-1 per a-block.
                let nf = n as f64;
                let value_lipschitz = (nf * (1.0 + (2.0 * nf - 1.0).powi(2))).sqrt();
                LipschitzEstimate { grad_smoothness: 1.0 / 0.02, value_lipschitz, empirical: true }
            }
        };
        Ok(Self { payoff, feasible, constraint: None, seed: None, lipschitz })
    }

    pub fn payoff(&self) -> &Payoff {
        &self.payoff
    }

    pub fn family(&self) -> GameFamily {
        self.payoff.family()
    }

    pub fn constraint(&self) -> Option<ConstraintKind> {
        self.constraint
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Whether this is one of the experiment setups as published: norm-min
    /// games use the affine constraint, bilinear games use either.
    pub fn is_canonical(&self) -> bool {
        match (self.family(), self.constraint) {
            (_, None) => false,
            (GameFamily::MonotoneNormMin, Some(c)) => c == ConstraintKind::Affine,
            _ => true,
        }
    }

    /// Same game with every payoff matrix scaled by `factor` (shifts untouched).
    pub fn with_scaled_payoffs(&self, factor: f64) -> Result<Self> {
        let payoff = match &self.payoff {
            Payoff::BilinearZeroSum { q } => Payoff::BilinearZeroSum { q: q.scaled(factor) },
            Payoff::BilinearGeneralSum { q1, q2 } => {
                Payoff::BilinearGeneralSum { q1: q1.scaled(factor), q2: q2.scaled(factor) }
            }
            other => other.clone(),
        };
        let mut out = Self::new(payoff, self.feasible.clone())?;
        out.constraint = self.constraint;
        out.seed = self.seed;
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| GneError::InvalidParameter(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| GneError::InvalidParameter(e.to_string()))
    }

    fn check(&self, player: usize, a: &[f64]) -> Result<()> {
        self.layout().check_player(player)?;
        self.layout().check_profile(a)
    }

    fn norm_min_residual(&self, shifts: &[Vec<f64>], player: usize, a: &[f64]) -> Vec<f64> {
        let layout = self.layout();
        let mut z: Vec<f64> = shifts[player].iter().map(|s| -s).collect();
        for j in 0..layout.num_players() {
            for (zk, ak) in z.iter_mut().zip(&a[layout.range(j)]) {
                *zk += ak;
            }
        }
        z
    }
}

fn require_two_players(n: usize) -> Result<()> {
    if n == 2 {
        Ok(())
    } else {
        Err(GneError::InvalidParameter(format!("bilinear games have exactly 2 players, got {n}")))
    }
}

impl PseudoGame for GameSpec {
    fn feasible_set(&self) -> &FeasibleSet {
        &self.feasible
    }

    fn utility(&self, player: usize, a: &[f64]) -> Result<f64> {
        self.check(player, a)?;
        let layout = self.layout();
        Ok(match &self.payoff {
            Payoff::BilinearZeroSum { q } => {
                let v = q.bilinear(&a[layout.range(0)], &a[layout.range(1)]);
                if player == 0 {
                    v
                } else {
                    -v
                }
            }
            Payoff::BilinearGeneralSum { q1, q2 } => {
                let q = if player == 0 { q1 } else { q2 };
                q.bilinear(&a[layout.range(0)], &a[layout.range(1)])
            }
            Payoff::MonotoneNormMin { shifts } => -norm(&self.norm_min_residual(shifts, player, a)),
        })
    }

    fn utility_gradient(&self, player: usize, a: &[f64], out: &mut [f64]) -> Result<()> {
        self.check(player, a)?;
        check_len(a.len(), out.len())?;
        let layout = self.layout();
        let (r0, r1) = (layout.range(0), layout.range(1.min(layout.num_players() - 1)));
        match &self.payoff {
            Payoff::BilinearZeroSum { q } => {
                let (head, tail) = out.split_at_mut(r1.start);
                q.mul_vec_into(&a[r1.clone()], &mut head[r0.clone()]);
                q.tr_mul_vec_into(&a[r0], tail);
                if player == 1 {
                    out.iter_mut().for_each(|g| *g = -*g);
                }
            }
            Payoff::BilinearGeneralSum { q1, q2 } => {
                let q = if player == 0 { q1 } else { q2 };
                let (head, tail) = out.split_at_mut(r1.start);
                q.mul_vec_into(&a[r1], &mut head[r0.clone()]);
                q.tr_mul_vec_into(&a[r0], tail);
            }
            Payoff::MonotoneNormMin { shifts } => {
                let z = self.norm_min_residual(shifts, player, a);
                let zn = norm(&z);
                for j in 0..layout.num_players() {
                    for (g, zk) in out[layout.range(j)].iter_mut().zip(&z) {
                        *g = if zn < NORM_KINK_TOL { 0.0 } else { -zk / zn };
                    }
                }
            }
        }
        Ok(())
    }

    fn lipschitz(&self) -> LipschitzEstimate {
        self.lipschitz
    }

    fn step_overrides(&self) -> Option<StepOverrides> {
        match self.payoff {
            Payoff::MonotoneNormMin { .. } => Some(StepOverrides { eda: 0.02, ada_outer: 0.02, ada_inner: 0.05 }),
            _ => None,
        }
    }
}

/// Builds one of the benchmark games.
///
/// Matrix entries and shifts are drawn i.i.d. uniform on `[-1, 1]` from a
/// ChaCha8 stream seeded with `seed`; the action box is `[-10, 10]` per
/// coordinate, the affine constraint is `1 - Σ a >= 0` and the ball has radius 1.
/// `num_players` is ignored for the two-player bilinear families.
pub fn make_benchmark(
    family: GameFamily,
    num_players: usize,
    dim: usize,
    constraint: ConstraintKind,
    seed: u64,
) -> Result<GameSpec> {
    if dim == 0 {
        return Err(GneError::InvalidParameter("action dimension must be >= 1".into()));
    }
    let n = match family {
        GameFamily::BilinearZeroSum | GameFamily::BilinearGeneralSum => 2,
        GameFamily::MonotoneNormMin => num_players,
    };
    let layout = ProfileLayout::uniform(n, dim)?;
    let total = layout.total_len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw_matrix = |rng: &mut ChaCha8Rng| {
        let data = (0..dim * dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        Matrix::from_row_major(dim, dim, data)
    };
    let payoff = match family {
        GameFamily::BilinearZeroSum => Payoff::BilinearZeroSum { q: draw_matrix(&mut rng)? },
        GameFamily::BilinearGeneralSum => {
            let q1 = draw_matrix(&mut rng)?;
            let q2 = draw_matrix(&mut rng)?;
            Payoff::BilinearGeneralSum { q1, q2 }
        }
        GameFamily::MonotoneNormMin => Payoff::MonotoneNormMin {
            shifts: (0..n).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect()).collect(),
        },
    };
    let joint = match constraint {
        ConstraintKind::Affine => JointConstraint::AffineHalfspace { w: vec![1.0; total], r: 1.0 },
        ConstraintKind::Ball => JointConstraint::Ball { radius: 1.0 },
    };
    let feasible = FeasibleSet::new(layout, BoxBounds::uniform(total, -BENCHMARK_BOX, BENCHMARK_BOX)?, joint)?;
    let mut spec = GameSpec::new(payoff, feasible)?;
    spec.constraint = Some(constraint);
    spec.seed = Some(seed);
    Ok(spec)
}
