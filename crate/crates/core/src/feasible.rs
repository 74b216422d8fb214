//! Jointly convex feasible sets: a box intersected with at most one shared
//! constraint `g(a) >= 0`, plus exact Euclidean projection onto them.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_len, GneError, Result};
use crate::profile::{dist, dot, norm, ProfileLayout, StrategyProfile};

/// Membership tolerance used when checking that inputs are feasible.
pub const FEASIBILITY_TOL: f64 = 1e-9;

const BISECTION_MAX_STEPS: usize = 200;
const BISECTION_RESIDUAL_TOL: f64 = 1e-12;
const BALL_BISECTION_STEPS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_len(lower.len(), upper.len())?;
        check_finite(&lower, "box lower bound")?;
        check_finite(&upper, "box upper bound")?;
        if lower.iter().zip(&upper).any(|(l, u)| l > u) {
            return Err(GneError::InvalidParameter("box lower bound exceeds upper bound".into()));
        }
        Ok(Self { lower, upper })
    }

    pub fn uniform(len: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; len], vec![upper; len])
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| 0.5 * (l + u)).collect()
    }

    /// Euclidean length of the box diagonal.
    pub fn diameter(&self) -> f64 {
        dist(&self.lower, &self.upper)
    }

    pub fn clip_into(&self, y: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = y[k].clamp(self.lower[k], self.upper[k]);
        }
    }

    fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self { lower: self.lower[range.clone()].to_vec(), upper: self.upper[range].to_vec() }
    }

    /// True when the origin-centred ball of `radius` lies inside the box.
    fn contains_ball(&self, radius: f64) -> bool {
        self.lower.iter().zip(&self.upper).all(|(&l, &u)| l <= -radius && u >= radius)
    }
}

/// The single shared constraint `g(a) >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JointConstraint {
    None,
    /// `g(a) = r - w·a`
    AffineHalfspace { w: Vec<f64>, r: f64 },
    /// `g(a) = radius² - ‖a‖²`
    Ball { radius: f64 },
}

impl JointConstraint {
    pub fn value(&self, a: &[f64]) -> f64 {
        match self {
            JointConstraint::None => f64::INFINITY,
            JointConstraint::AffineHalfspace { w, r } => r - dot(w, a),
            JointConstraint::Ball { radius } => radius * radius - dot(a, a),
        }
    }

    fn validate(&self, len: usize) -> Result<()> {
        match self {
            JointConstraint::None => Ok(()),
            JointConstraint::AffineHalfspace { w, r } => {
                check_len(len, w.len())?;
                check_finite(w, "halfspace normal")?;
                if !r.is_finite() {
                    return Err(GneError::NonFinite("halfspace offset"));
                }
                if w.iter().all(|&x| x == 0.0) {
                    return Err(GneError::InvalidParameter("halfspace normal must be nonzero".into()));
                }
                Ok(())
            }
            JointConstraint::Ball { radius } => {
                if radius.is_finite() && *radius > 0.0 {
                    Ok(())
                } else {
                    Err(GneError::InvalidParameter(format!("ball radius must be positive, got {radius}")))
                }
            }
        }
    }
}

/// `𝒜 = {a ∈ box : g(a) >= 0}` over a given profile layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFeasibleSet")]
pub struct FeasibleSet {
    layout: ProfileLayout,
    bounds: BoxBounds,
    joint: JointConstraint,
}

#[derive(Deserialize)]
struct RawFeasibleSet {
    layout: ProfileLayout,
    bounds: BoxBounds,
    joint: JointConstraint,
}

impl TryFrom<RawFeasibleSet> for FeasibleSet {
    type Error = GneError;

    fn try_from(raw: RawFeasibleSet) -> Result<Self> {
        Self::new(raw.layout, raw.bounds, raw.joint)
    }
}

impl FeasibleSet {
    pub fn new(layout: ProfileLayout, bounds: BoxBounds, joint: JointConstraint) -> Result<Self> {
        check_len(layout.total_len(), bounds.len())?;
        joint.validate(layout.total_len())?;
        let set = Self { layout, bounds, joint };
        let center = set.bounds.center();
        let probe = set.project(&center).map_err(|_| GneError::Infeasible { violation: f64::INFINITY })?;
        let violation = set.violation(&probe);
        if violation > FEASIBILITY_TOL {
            return Err(GneError::Infeasible { violation });
        }
        Ok(set)
    }

    pub fn layout(&self) -> &ProfileLayout {
        &self.layout
    }

    pub fn bounds(&self) -> &BoxBounds {
        &self.bounds
    }

    pub fn joint(&self) -> &JointConstraint {
        &self.joint
    }

    pub fn dim(&self) -> usize {
        self.layout.total_len()
    }

    /// Largest violation of any box bound or of `g >= 0`; zero when feasible.
    pub fn violation(&self, a: &[f64]) -> f64 {
        let box_violation = a
            .iter()
            .zip(self.bounds.lower.iter().zip(&self.bounds.upper))
            .map(|(&x, (&l, &u))| (l - x).max(x - u))
            .fold(0.0_f64, f64::max);
        box_violation.max(-self.joint.value(a)).max(0.0)
    }

    pub fn contains(&self, a: &[f64], tol: f64) -> Result<bool> {
        self.layout.check_profile(a)?;
        if tol.is_nan() || tol < 0.0 {
            return Err(GneError::InvalidParameter(format!("tolerance must be >= 0, got {tol}")));
        }
        Ok(self.violation(a) <= tol)
    }

    pub(crate) fn check_feasible(&self, a: &[f64]) -> Result<()> {
        self.layout.check_profile(a)?;
        check_finite(a, "strategy profile")?;
        let violation = self.violation(a);
        if violation > FEASIBILITY_TOL {
            Err(GneError::Infeasible { violation })
        } else {
            Ok(())
        }
    }

    /// Euclidean projection of `y` onto the set.
    pub fn project(&self, y: &[f64]) -> Result<StrategyProfile> {
        let mut out = vec![0.0; y.len()];
        self.project_into(y, &mut out)?;
        StrategyProfile::new(self.layout.clone(), out)
    }

    /// Allocation-free projection used inside solver loops.
    pub fn project_into(&self, y: &[f64], out: &mut [f64]) -> Result<()> {
        self.layout.check_profile(y)?;
        check_len(y.len(), out.len())?;
        check_finite(y, "projection input")?;
        match &self.joint {
            JointConstraint::None => {
                self.bounds.clip_into(y, out);
                Ok(())
            }
            JointConstraint::Ball { radius } if self.bounds.contains_ball(*radius) => {
                let n = norm(y);
                let scale = if n > *radius { radius / n } else { 1.0 };
                let (lower, upper) = (self.bounds.lower(), self.bounds.upper());
                for k in 0..y.len() {
                    out[k] = (y[k] * scale).clamp(lower[k], upper[k]);
                }
                Ok(())
            }
            JointConstraint::Ball { radius } => {
                project_box_ball(&self.bounds, *radius, None, y, out);
                Ok(())
            }
            JointConstraint::AffineHalfspace { w, r } => project_box_halfspace(&self.bounds, w, *r, None, y, out),
        }
    }

    /// Projection in the diagonal metric `Σ_k (x_k - y_k)² / scale_k`, i.e. the
    /// point of the set closest to `y` after stretching coordinate `k` by
    /// `1/√scale_k`. Used for ascent steps with a separate step length per block.
    pub fn project_scaled_into(&self, y: &[f64], scale: &[f64], out: &mut [f64]) -> Result<()> {
        self.layout.check_profile(y)?;
        check_len(y.len(), out.len())?;
        check_len(y.len(), scale.len())?;
        check_finite(y, "projection input")?;
        if scale.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(GneError::InvalidParameter("projection scales must be positive and finite".into()));
        }
        match &self.joint {
            JointConstraint::None => {
                self.bounds.clip_into(y, out);
                Ok(())
            }
            JointConstraint::Ball { radius } => {
                project_box_ball(&self.bounds, *radius, Some(scale), y, out);
                Ok(())
            }
            JointConstraint::AffineHalfspace { w, r } => project_box_halfspace(&self.bounds, w, *r, Some(scale), y, out),
        }
    }

    /// The set of deviations open to `player` while the others hold `a_{-i}`,
    /// i.e. `{b_i ∈ box_i : g(b_i, a_{-i}) >= 0}` over a one-player layout.
    pub fn slice(&self, player: usize, a: &[f64]) -> Result<FeasibleSet> {
        self.layout.check_player(player)?;
        self.check_feasible(a)?;
        let range = self.layout.range(player);
        let layout = ProfileLayout::uniform(1, range.len())?;
        let bounds = self.bounds.slice(range.clone());
        let joint = match &self.joint {
            JointConstraint::None => JointConstraint::None,
            JointConstraint::AffineHalfspace { w, r } => {
                let own = w[range.clone()].to_vec();
                let others: f64 = (0..a.len()).filter(|k| !range.contains(k)).map(|k| w[k] * a[k]).sum();
                if own.iter().all(|&x| x == 0.0) {
                    JointConstraint::None
                } else {
                    JointConstraint::AffineHalfspace { w: own, r: r - others }
                }
            }
            JointConstraint::Ball { radius } => {
                let others_sq: f64 = (0..a.len()).filter(|k| !range.contains(k)).map(|k| a[k] * a[k]).sum();
                JointConstraint::Ball { radius: (radius * radius - others_sq).max(0.0).sqrt() }
            }
        };
        // The slice contains a_i, so it is nonempty; a zero-radius ball is allowed here.
        Ok(FeasibleSet { layout, bounds, joint })
    }

    /// Uniform draw over the box followed by projection onto the set.
    pub fn random_feasible<R: Rng + ?Sized>(&self, rng: &mut R) -> StrategyProfile {
        let draw: Vec<f64> = self
            .bounds
            .lower
            .iter()
            .zip(&self.bounds.upper)
            .map(|(&l, &u)| if l < u { rng.gen_range(l..=u) } else { l })
            .collect();
        self.project(&draw).expect("projection of a box point onto a validated nonempty set")
    }
}

/// Projection onto `box ∩ {w·x <= r}` in the metric `Σ_k (x_k - y_k)² / s_k`
/// (`s = 1` without a scale). The minimizer is `clip(y - λ s∘w)` where the
/// multiplier `λ >= 0` solves `w·x(λ) = r`; `w·x(λ)` is nonincreasing, so `λ`
/// is bracketed exactly and bisected, then polished by solving the linear
/// equation on the coordinates left free.
fn project_box_halfspace(
    bounds: &BoxBounds,
    w: &[f64],
    r: f64,
    scale: Option<&[f64]>,
    y: &[f64],
    out: &mut [f64],
) -> Result<()> {
    bounds.clip_into(y, out);
    if dot(w, out) <= r {
        return Ok(());
    }
    let (lower, upper) = (&bounds.lower, &bounds.upper);
    let sw = |k: usize| scale.map_or(w[k], |s| s[k] * w[k]);
    let clipped_at = |lambda: f64, k: usize| (y[k] - lambda * sw(k)).clamp(lower[k], upper[k]);
    let lhs = |lambda: f64| (0..y.len()).map(|k| w[k] * clipped_at(lambda, k)).sum::<f64>();

    // Beyond this multiplier every coordinate with w_k != 0 sits on its w-minimising bound.
    let mut hi = 0.0_f64;
    for k in 0..y.len() {
        if w[k] > 0.0 {
            hi = hi.max((y[k] - lower[k]) / sw(k));
        } else if w[k] < 0.0 {
            hi = hi.max((y[k] - upper[k]) / sw(k));
        }
    }
    if lhs(hi) - r > BISECTION_RESIDUAL_TOL * r.abs().max(1.0) {
        return Err(GneError::BracketFailure);
    }

    let mut lo = 0.0_f64;
    let mut lambda = hi;
    let mut residual = lhs(hi) - r;
    for _ in 0..BISECTION_MAX_STEPS {
        let mid = 0.5 * (lo + hi);
        residual = lhs(mid) - r;
        lambda = mid;
        if residual.abs() <= BISECTION_RESIDUAL_TOL || mid <= lo || mid >= hi {
            break;
        }
        if residual > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let (mut free_wy, mut free_ww, mut fixed) = (0.0, 0.0, 0.0);
    for k in 0..y.len() {
        let z = y[k] - lambda * sw(k);
        if z > lower[k] && z < upper[k] {
            free_wy += w[k] * y[k];
            free_ww += w[k] * sw(k);
        } else {
            fixed += w[k] * z.clamp(lower[k], upper[k]);
        }
    }
    if free_ww > 0.0 {
        let exact = (free_wy + fixed - r) / free_ww;
        if exact >= 0.0 {
            let polished = lhs(exact) - r;
            if polished.abs() < residual.abs() {
                lambda = exact;
                residual = polished;
            }
        }
    }
    if residual.abs() > 1e-9 * r.abs().max(1.0) {
        return Err(GneError::BracketFailure);
    }
    for (k, o) in out.iter_mut().enumerate() {
        *o = clipped_at(lambda, k);
    }
    Ok(())
}

/// Projection onto `box ∩ {‖x‖ <= radius}` in the metric `Σ_k (x_k - y_k)² / s_k`.
///
/// For a multiplier `μ >= 0` on the ball the box-constrained minimizer is
/// `x(μ) = clip(y ∘ 1/(1 + μ s))`. Every `|x_k(μ)|` is nonincreasing in `μ`
/// and `x(∞) = clip(0)` lies in the ball whenever the set is nonempty, so `μ`
/// is bracketed by doubling, bisected, and the feasible end is returned.
fn project_box_ball(bounds: &BoxBounds, radius: f64, scale: Option<&[f64]>, y: &[f64], out: &mut [f64]) {
    let (lower, upper) = (bounds.lower(), bounds.upper());
    let image = |mu: f64, out: &mut [f64]| {
        for k in 0..y.len() {
            let s = scale.map_or(1.0, |s| s[k]);
            out[k] = (y[k] / (1.0 + mu * s)).clamp(lower[k], upper[k]);
        }
        norm(out)
    };
    if image(0.0, out) <= radius {
        return;
    }
    let mut inside = 1.0;
    while image(inside, out) > radius {
        inside *= 2.0;
        if inside > 1e300 {
            bounds.clip_into(&vec![0.0; y.len()], out);
            return;
        }
    }
    let mut outside = 0.0;
    for _ in 0..BALL_BISECTION_STEPS {
        let mid = 0.5 * (inside + outside);
        if mid <= outside || mid >= inside {
            break;
        }
        if image(mid, out) <= radius {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    image(inside, out);
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn halfspace_2d() -> FeasibleSet {
        FeasibleSet::new(
            ProfileLayout::uniform(2, 1).unwrap(),
            BoxBounds::uniform(2, -10.0, 10.0).unwrap(),
            JointConstraint::AffineHalfspace { w: vec![1.0, 1.0], r: 1.0 },
        )
        .unwrap()
    }

    fn ball_2d(radius: f64) -> FeasibleSet {
        FeasibleSet::new(
            ProfileLayout::uniform(2, 1).unwrap(),
            BoxBounds::uniform(2, -10.0, 10.0).unwrap(),
            JointConstraint::Ball { radius },
        )
        .unwrap()
    }

    #[test]
    fn membership() {
        let s = halfspace_2d();
        assert!(s.contains(&[0.0, 0.0], 0.0).unwrap());
        assert!(!s.contains(&[1.0, 1.0], 0.0).unwrap());
        assert!(ball_2d(1.0).contains(&[0.6, 0.8], 1e-12).unwrap());
        assert!(s.contains(&[0.0], 0.0).is_err());
    }

    #[test]
    fn halfspace_projection_of_corner_point() {
        let p = halfspace_2d().project(&[2.0, 2.0]).unwrap();
        assert!(dist(&p, &[0.5, 0.5]) < 1e-10);
    }

    #[test]
    fn halfspace_projection_with_clipped_coordinates() {
        // y = (30, -2): x_0 stays clipped at 10 while x_1 = -2 - λ absorbs the
        // constraint, reaching sum 1 at λ = 7.
        let p = halfspace_2d().project(&[30.0, -2.0]).unwrap();
        assert!(dist(&p, &[10.0, -9.0]) < 1e-10, "{p:?}");
    }

    #[test]
    fn ball_projection_scales_radially() {
        let p = ball_2d(1.0).project(&[3.0, 4.0]).unwrap();
        assert!(dist(&p, &[0.6, 0.8]) < 1e-12);
    }

    #[test]
    fn projection_is_identity_on_the_set() {
        for set in [halfspace_2d(), ball_2d(1.0)] {
            let y = [0.3, -0.4];
            assert_eq!(set.project(&y).unwrap().values(), &y);
        }
    }

    #[test]
    fn ball_larger_than_box_is_projected_exactly() {
        let set = FeasibleSet::new(
            ProfileLayout::uniform(2, 1).unwrap(),
            BoxBounds::uniform(2, -0.5, 0.5).unwrap(),
            JointConstraint::Ball { radius: 0.6 },
        )
        .unwrap();
        // The corner (0.5, 0.5) lies outside the ball; the projection of a far
        // point along the diagonal lands on the ball at (0.6/√2, 0.6/√2).
        let p = set.project(&[5.0, 5.0]).unwrap();
        let c = 0.6 / 2f64.sqrt();
        assert!(dist(&p, &[c, c]) < 1e-9, "{p:?}");
        // Off-diagonal: box clips x_0 to 0.5, the ball leaves x_1 = sqrt(0.36 - 0.25).
        let p = set.project(&[5.0, 0.2]).unwrap();
        assert!(dist(&p, &[0.5, 0.2]) < 1e-9, "{p:?}");
        let p = set.project(&[5.0, 2.0]).unwrap();
        let expected_y = (0.36f64 - 0.25).sqrt();
        assert!(p[0] <= 0.5 + 1e-12 && norm(&p) <= 0.6 + 1e-9);
        assert!((p[0] - 0.5).abs() < 1e-6 && (p[1] - expected_y).abs() < 1e-6, "{p:?}");
    }

    #[test]
    fn empty_sets_are_rejected() {
        let err = FeasibleSet::new(
            ProfileLayout::uniform(2, 1).unwrap(),
            BoxBounds::uniform(2, 1.0, 2.0).unwrap(),
            JointConstraint::AffineHalfspace { w: vec![1.0, 1.0], r: 1.0 },
        );
        assert!(matches!(err, Err(GneError::Infeasible { .. })));
        let err = FeasibleSet::new(
            ProfileLayout::uniform(1, 1).unwrap(),
            BoxBounds::uniform(1, 2.0, 3.0).unwrap(),
            JointConstraint::Ball { radius: 1.0 },
        );
        assert!(matches!(err, Err(GneError::Infeasible { .. })));
    }

    #[test]
    fn constraint_validation() {
        let layout = ProfileLayout::uniform(2, 1).unwrap();
        let bounds = BoxBounds::uniform(2, -1.0, 1.0).unwrap();
        assert!(FeasibleSet::new(layout.clone(), bounds.clone(), JointConstraint::Ball { radius: 0.0 }).is_err());
        assert!(FeasibleSet::new(
            layout.clone(),
            bounds.clone(),
            JointConstraint::AffineHalfspace { w: vec![0.0, 0.0], r: 1.0 }
        )
        .is_err());
        assert!(FeasibleSet::new(layout, bounds, JointConstraint::AffineHalfspace { w: vec![1.0], r: 1.0 }).is_err());
        assert!(BoxBounds::new(vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn projection_rejects_non_finite_input() {
        assert_eq!(halfspace_2d().project(&[f64::NAN, 0.0]), Err(GneError::NonFinite("projection input")));
    }

    #[test]
    fn slices() {
        let ball = ball_2d(1.0);
        let s = ball.slice(0, &[0.0, 0.6]).unwrap();
        match s.joint() {
            JointConstraint::Ball { radius } => assert!((radius - 0.8).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        // Membership grid: b is in the slice iff (b, 0.6) is in the ball.
        for k in -120..=120 {
            let b = k as f64 / 100.0;
            assert_eq!(
                s.contains(&[b], 1e-9).unwrap(),
                ball.contains(&[b, 0.6], 1e-9).unwrap(),
                "b = {b}"
            );
        }

        let hs = halfspace_2d().slice(0, &[0.0, 0.25]).unwrap();
        assert_eq!(hs.joint(), &JointConstraint::AffineHalfspace { w: vec![1.0], r: 0.75 });

        let free = FeasibleSet::new(
            ProfileLayout::uniform(2, 1).unwrap(),
            BoxBounds::new(vec![-1.0, -2.0], vec![1.0, 2.0]).unwrap(),
            JointConstraint::None,
        )
        .unwrap();
        let s = free.slice(1, &[0.0, 0.0]).unwrap();
        assert_eq!(s.bounds().lower(), &[-2.0]);
        assert_eq!(s.joint(), &JointConstraint::None);

        assert!(matches!(halfspace_2d().slice(0, &[1.0, 1.0]), Err(GneError::Infeasible { .. })));
    }

    #[test]
    fn random_feasible_is_deterministic_and_feasible() {
        let set = halfspace_2d();
        let a = set.random_feasible(&mut ChaCha8Rng::seed_from_u64(3));
        let b = set.random_feasible(&mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
        assert!(set.contains(&a, FEASIBILITY_TOL).unwrap());

        let free = FeasibleSet::new(
            ProfileLayout::uniform(2, 2).unwrap(),
            BoxBounds::uniform(4, -10.0, 10.0).unwrap(),
            JointConstraint::None,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let raw: Vec<f64> = (0..4).map(|_| rng.gen_range(-10.0..=10.0)).collect();
        let drawn = free.random_feasible(&mut ChaCha8Rng::seed_from_u64(11));
        assert_eq!(drawn.values(), raw.as_slice());
    }

    #[test]
    fn serde_round_trip_validates() {
        let set = halfspace_2d();
        let json = serde_json::to_string(&set).unwrap();
        let back: FeasibleSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, set);
        let bad = json.replace("\"r\":1.0", "\"r\":-100.0");
        assert!(serde_json::from_str::<FeasibleSet>(&bad).is_err());
    }
}
