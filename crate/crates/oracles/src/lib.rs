//! Slow reference computations for the test suites.
//!
//! Every routine here works from the plain descriptors (box bounds, the joint
//! constraint data, utility values) and never calls the projection, ascent or
//! exploitability code it is used to check.

use gne_core::{BoxBounds, FeasibleSet, JointConstraint, ProfileLayout, PseudoGame};
use rand::Rng;

/// `g(x)` recomputed from the constraint data; `+∞` when there is no joint constraint.
pub fn joint_value(joint: &JointConstraint, x: &[f64]) -> f64 {
    match joint {
        JointConstraint::None => f64::INFINITY,
        JointConstraint::AffineHalfspace { w, r } => r - w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>(),
        JointConstraint::Ball { radius } => radius * radius - x.iter().map(|x| x * x).sum::<f64>(),
    }
}

pub fn is_feasible(set: &FeasibleSet, x: &[f64], tol: f64) -> bool {
    let (lo, hi) = (set.bounds().lower(), set.bounds().upper());
    x.iter().enumerate().all(|(k, v)| *v >= lo[k] - tol && *v <= hi[k] + tol) && joint_value(set.joint(), x) >= -tol
}

fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Euclidean projection by enumerating active sets: every coordinate is at its
/// lower bound, its upper bound or free, and the joint constraint is either
/// inactive or holds with equality. The KKT point of the true active set is
/// among the candidates, so the nearest feasible candidate is the projection.
/// Cost is `2·3^d` candidates; intended for `d <= 6`.
pub fn project_by_enumeration(set: &FeasibleSet, y: &[f64]) -> Vec<f64> {
    let d = y.len();
    assert!(d <= 8, "enumeration oracle is exponential in the dimension");
    let (lo, hi) = (set.bounds().lower(), set.bounds().upper());
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |x: Vec<f64>| {
        if !is_feasible(set, &x, 1e-11) {
            return;
        }
        let dist = distance(&x, y);
        if best.as_ref().is_none_or(|(b, _)| dist < *b) {
            best = Some((dist, x));
        }
    };
    let mut states = vec![0u8; d];
    for code in 0..3usize.pow(d as u32) {
        let mut rest = code;
        for s in states.iter_mut() {
            *s = (rest % 3) as u8;
            rest /= 3;
        }
        let mut x: Vec<f64> = (0..d)
            .map(|k| match states[k] {
                1 => lo[k],
                2 => hi[k],
                _ => y[k],
            })
            .collect();
        consider(x.clone());
        let free: Vec<usize> = (0..d).filter(|&k| states[k] == 0).collect();
        match set.joint() {
            JointConstraint::None => {}
            JointConstraint::AffineHalfspace { w, r } => {
                let wf2: f64 = free.iter().map(|&k| w[k] * w[k]).sum();
                if wf2 > 0.0 {
                    let lhs: f64 = (0..d).map(|k| w[k] * x[k]).sum();
                    let lambda = (lhs - r) / wf2;
                    for &k in &free {
                        x[k] = y[k] - lambda * w[k];
                    }
                    consider(x);
                }
            }
            JointConstraint::Ball { radius } => {
                let fixed_sq: f64 = (0..d).filter(|k| states[*k] != 0).map(|k| x[k] * x[k]).sum();
                let remaining = radius * radius - fixed_sq;
                let free_norm = free.iter().map(|&k| y[k] * y[k]).sum::<f64>().sqrt();
                if remaining >= 0.0 && free_norm > 0.0 {
                    let t = remaining.sqrt() / free_norm;
                    for &k in &free {
                        x[k] = t * y[k];
                    }
                    consider(x);
                }
            }
        }
    }
    best.expect("the feasible set is nonempty").1
}

/// Central finite-difference gradient.
pub fn central_gradient(mut f: impl FnMut(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|k| {
            probe[k] = x[k] + h;
            let up = f(&probe);
            probe[k] = x[k] - h;
            let down = f(&probe);
            probe[k] = x[k];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Largest singular value from a dense SVD.
pub fn largest_singular_value(rows: usize, cols: usize, row_major: &[f64]) -> f64 {
    let m = nalgebra::DMatrix::from_row_slice(rows, cols, row_major);
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Sum of unilateral regrets `Σ_i u_i(b_i, a_{-i}) - u_i(a)` from utility values only.
pub fn regret_sum<G: PseudoGame + ?Sized>(game: &G, a: &[f64], b: &[f64]) -> f64 {
    let layout = game.layout();
    let mut mixed = a.to_vec();
    let mut total = 0.0;
    for i in 0..layout.num_players() {
        let range = layout.range(i);
        mixed[range.clone()].copy_from_slice(&b[range.clone()]);
        total += game.utility(i, &mixed).unwrap() - game.utility(i, a).unwrap();
        mixed[range.clone()].copy_from_slice(&a[range]);
    }
    total
}

/// Which deviations a two-dimensional grid search ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeviationSet {
    /// `b ∈ 𝒜`: the joint constraint evaluated at `b` itself.
    Joint,
    /// `b_i` feasible against `a_{-i}` for every player separately.
    Unilateral,
}

fn deviation_member(set: &FeasibleSet, a: &[f64], kind: DeviationSet, b: [f64; 2]) -> bool {
    let (lo, hi) = (set.bounds().lower(), set.bounds().upper());
    if (0..2).any(|k| b[k] < lo[k] || b[k] > hi[k]) {
        return false;
    }
    let joint = set.joint();
    match kind {
        DeviationSet::Joint => joint_value(joint, &b) >= -1e-12,
        DeviationSet::Unilateral => {
            joint_value(joint, &[b[0], a[1]]) >= -1e-12 && joint_value(joint, &[a[0], b[1]]) >= -1e-12
        }
    }
}

/// Maximum of `Σ_i u_i(b_i, a_{-i}) - u_i(a)` over deviation pairs for a
/// two-player game with scalar actions, by exhaustive grid search.
///
/// The coarse pass visits every grid point of the box with spacing
/// `coarse_step`, together with the points where each grid line crosses the
/// constraint boundary (located by bisection). Each further pass searches a
/// window of two spacings around the incumbent with a ten times finer spacing,
/// until the spacing reaches `fine_step`.
pub fn grid_exploitability<G: PseudoGame + ?Sized>(
    game: &G,
    a: &[f64],
    kind: DeviationSet,
    coarse_step: f64,
    fine_step: f64,
) -> f64 {
    assert_eq!(a.len(), 2, "grid oracle needs two scalar players");
    let set = game.feasible_set();
    let (lo, hi) = (set.bounds().lower().to_vec(), set.bounds().upper().to_vec());
    let value = |b: [f64; 2]| regret_sum(game, a, &b);
    let member = |b: [f64; 2]| deviation_member(set, a, kind, b);
    let window = [[lo[0], hi[0]], [lo[1], hi[1]]];
    let (mut best, mut arg) = search_window(&value, &member, window, coarse_step);
    // Deviating to `a` itself is always allowed and worth zero.
    if best < 0.0 {
        best = 0.0;
        arg = [a[0], a[1]];
    }
    let mut step = coarse_step;
    while step > fine_step * (1.0 + 1e-9) {
        let around = |k: usize| [(arg[k] - 2.0 * step).max(lo[k]), (arg[k] + 2.0 * step).min(hi[k])];
        let window = [around(0), around(1)];
        step = (step / 10.0).max(fine_step);
        let (refined, refined_arg) = search_window(&value, &member, window, step);
        if refined > best {
            best = refined;
            arg = refined_arg;
        }
    }
    best
}

fn grid_points(range: [f64; 2], step: f64) -> Vec<f64> {
    let count = ((range[1] - range[0]) / step).floor() as usize;
    let mut points: Vec<f64> = (0..=count).map(|k| range[0] + k as f64 * step).collect();
    if points.last().is_none_or(|p| *p < range[1]) {
        points.push(range[1]);
    }
    points
}

fn search_window(
    value: &dyn Fn([f64; 2]) -> f64,
    member: &dyn Fn([f64; 2]) -> bool,
    window: [[f64; 2]; 2],
    step: f64,
) -> (f64, [f64; 2]) {
    let axes = [grid_points(window[0], step), grid_points(window[1], step)];
    let mut best = f64::NEG_INFINITY;
    let mut arg = [f64::NAN; 2];
    let mut visit = |b: [f64; 2]| {
        if member(b) {
            let v = value(b);
            if v > best {
                best = v;
                arg = b;
            }
        }
    };
    for line_axis in 0..2 {
        let scan_axis = 1 - line_axis;
        for &fixed in &axes[line_axis] {
            let point = |t: f64| {
                let mut b = [0.0; 2];
                b[line_axis] = fixed;
                b[scan_axis] = t;
                b
            };
            let mut previous: Option<(f64, bool)> = None;
            for &t in &axes[scan_axis] {
                let inside = member(point(t));
                if line_axis == 0 && inside {
                    visit(point(t));
                }
                if let Some((t_prev, was_inside)) = previous {
                    if was_inside != inside {
                        let (mut a_in, mut a_out) = if was_inside { (t_prev, t) } else { (t, t_prev) };
                        for _ in 0..80 {
                            let mid = 0.5 * (a_in + a_out);
                            if member(point(mid)) {
                                a_in = mid;
                            } else {
                                a_out = mid;
                            }
                        }
                        visit(point(a_in));
                    }
                }
                previous = Some((t, inside));
            }
        }
    }
    (best, arg)
}

/// The deviations open to player `i` against `a_{-i}`, rebuilt from the raw
/// constraint data as a one-player set.
fn unilateral_block_set(set: &FeasibleSet, a: &[f64], i: usize) -> FeasibleSet {
    let range = set.layout().range(i);
    let outside = |k: &usize| !range.contains(k);
    let joint = match set.joint() {
        JointConstraint::None => JointConstraint::None,
        JointConstraint::AffineHalfspace { w, r } => {
            let others: f64 = (0..a.len()).filter(outside).map(|k| w[k] * a[k]).sum();
            JointConstraint::AffineHalfspace { w: w[range.clone()].to_vec(), r: r - others }
        }
        JointConstraint::Ball { radius } => {
            let others: f64 = (0..a.len()).filter(outside).map(|k| a[k] * a[k]).sum();
            JointConstraint::Ball { radius: (radius * radius - others).max(0.0).sqrt() }
        }
    };
    let bounds = BoxBounds::new(
        set.bounds().lower()[range.clone()].to_vec(),
        set.bounds().upper()[range.clone()].to_vec(),
    )
    .unwrap();
    FeasibleSet::new(ProfileLayout::uniform(1, range.len()).unwrap(), bounds, joint).unwrap()
}

/// Projection onto the product of the players' unilateral deviation sets, one
/// exact enumeration per block.
fn project_unilateral(set: &FeasibleSet, a: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = y.to_vec();
    for i in 0..set.layout().num_players() {
        let range = set.layout().range(i);
        let block = project_by_enumeration(&unilateral_block_set(set, a, i), &y[range.clone()]);
        out[range].copy_from_slice(&block);
    }
    out
}

/// Maximum of `Σ_i u_i(b_i, a_{-i}) - u_i(a)` over unilaterally feasible
/// deviations, by projected ascent on all blocks jointly with finite-difference
/// gradients and a geometrically decaying step. Returns the best value seen.
pub fn joint_ascent_exploitability<G: PseudoGame + ?Sized>(game: &G, a: &[f64], iterations: usize) -> f64 {
    let set = game.feasible_set();
    let mut b = a.to_vec();
    let mut best = 0.0_f64;
    // The first step can cross the whole box; later ones shrink geometrically.
    let (lo, hi) = (set.bounds().lower(), set.bounds().upper());
    let diameter = lo.iter().zip(hi).map(|(l, h)| (h - l).powi(2)).sum::<f64>().sqrt();
    let g0 = central_gradient(|x| regret_sum(game, a, x), &b, 1e-7);
    let mut step = diameter / g0.iter().map(|g| g * g).sum::<f64>().sqrt().max(1e-12);
    let decay = (1e-12_f64).powf(1.0 / iterations as f64);
    for _ in 0..iterations {
        let g = central_gradient(|x| regret_sum(game, a, x), &b, 1e-7);
        let trial: Vec<f64> = b.iter().zip(&g).map(|(x, g)| x + step * g).collect();
        b = project_unilateral(set, a, &trial);
        if is_feasible_unilateral(set, a, &b) {
            best = best.max(regret_sum(game, a, &b));
        }
        step *= decay;
    }
    best
}

fn is_feasible_unilateral(set: &FeasibleSet, a: &[f64], b: &[f64]) -> bool {
    let layout = set.layout();
    (0..layout.num_players()).all(|i| {
        let mut mixed = a.to_vec();
        let range = layout.range(i);
        mixed[range.clone()].copy_from_slice(&b[range]);
        is_feasible(set, &mixed, 1e-9)
    })
}

/// A random nonempty set of dimension at most four, mixing every constraint kind
/// (including balls that stick out of the box).
pub fn random_small_set<R: Rng + ?Sized>(rng: &mut R) -> FeasibleSet {
    loop {
        let (players, dim) = [(1, 1), (2, 1), (1, 2), (3, 1), (2, 2), (4, 1), (1, 4)][rng.gen_range(0..7)];
        let layout = ProfileLayout::uniform(players, dim).unwrap();
        let len = layout.total_len();
        let symmetric = rng.gen_bool(0.4);
        let (lower, upper): (Vec<f64>, Vec<f64>) = (0..len)
            .map(|_| {
                if symmetric {
                    let h = rng.gen_range(0.5..4.0);
                    (-h, h)
                } else {
                    let lo = rng.gen_range(-3.0..1.0);
                    (lo, lo + rng.gen_range(0.2..4.0))
                }
            })
            .unzip();
        let joint = match rng.gen_range(0..5) {
            0 => JointConstraint::None,
            1 | 2 => {
                let w: Vec<f64> = (0..len)
                    .map(|_| {
                        let v: f64 = rng.gen_range(-1.0..1.0);
                        if v.abs() < 0.05 { 0.5 } else { v }
                    })
                    .collect();
                let center: f64 = w.iter().zip(lower.iter().zip(&upper)).map(|(w, (l, u))| w * 0.5 * (l + u)).sum();
                JointConstraint::AffineHalfspace { w, r: center + rng.gen_range(-1.5..1.0) }
            }
            _ => JointConstraint::Ball { radius: rng.gen_range(0.2..5.0) },
        };
        let bounds = BoxBounds::new(lower, upper).unwrap();
        if let Ok(set) = FeasibleSet::new(layout, bounds, joint) {
            return set;
        }
    }
}
