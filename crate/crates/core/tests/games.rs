use gne_core::{make_benchmark, ConstraintKind, GameFamily, GameSpec, PseudoGame};
use gne_oracles::{central_gradient, is_feasible};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn benchmarks() -> Vec<GameSpec> {
    vec![
        make_benchmark(GameFamily::BilinearZeroSum, 2, 4, ConstraintKind::Affine, 1).unwrap(),
        make_benchmark(GameFamily::BilinearGeneralSum, 2, 4, ConstraintKind::Ball, 2).unwrap(),
        make_benchmark(GameFamily::MonotoneNormMin, 3, 3, ConstraintKind::Affine, 3).unwrap(),
    ]
}

fn box_point(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-10.0..10.0)).collect()
}

/// Distance from the norm-min kinks `Σ_j a_j = s_i`, or infinity for smooth families.
fn kink_distance(game: &GameSpec, a: &[f64]) -> f64 {
    match game.payoff() {
        gne_core::Payoff::MonotoneNormMin { shifts } => {
            let layout = game.layout();
            let m = layout.dim(0);
            let total: Vec<f64> = (0..m).map(|k| (0..layout.num_players()).map(|j| a[layout.range(j).start + k]).sum()).collect();
            shifts
                .iter()
                .map(|s| total.iter().zip(s).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
                .fold(f64::INFINITY, f64::min)
        }
        _ => f64::INFINITY,
    }
}

#[test]
fn utility_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for game in benchmarks() {
        let len = game.layout().total_len();
        let mut checked = 0;
        while checked < 100 {
            let a = box_point(&mut rng, len);
            if kink_distance(&game, &a) < 1e-3 {
                continue;
            }
            for i in 0..game.num_players() {
                let fd = central_gradient(|x| game.utility(i, x).unwrap(), &a, 1e-6);
                let mut exact = vec![0.0; len];
                game.utility_gradient(i, &a, &mut exact).unwrap();
                for k in 0..len {
                    assert!((fd[k] - exact[k]).abs() <= 1e-5, "{:?} player {i} coord {k}: {} vs {}", game.family(), fd[k], exact[k]);
                }
                for j in 0..game.num_players() {
                    let block = game.utility_grad(i, &a, j).unwrap();
                    assert_eq!(block.as_slice(), &exact[game.layout().range(j)]);
                }
            }
            checked += 1;
        }
    }
}

#[test]
fn norm_min_gradient_example_matches_finite_differences() {
    let game = make_benchmark(GameFamily::MonotoneNormMin, 2, 1, ConstraintKind::Affine, 0).unwrap();
    // Rebuild with s₁ = 0 so the example is exact.
    let mut doc: serde_json::Value = serde_json::from_str(&game.to_json().unwrap()).unwrap();
    doc["payoff"]["shifts"] = serde_json::json!([[0.0], [0.5]]);
    let game = GameSpec::from_json(&doc.to_string()).unwrap();
    let a = [1.0, 1.0];
    assert_eq!(game.utility(0, &a).unwrap(), -2.0);
    let fd = central_gradient(|x| game.utility(0, x).unwrap(), &a, 1e-6);
    assert!((fd[0] + 1.0).abs() < 1e-8);
    assert_eq!(game.utility_grad(0, &a, 0).unwrap(), vec![-1.0]);
}

#[test]
fn zero_sum_utilities_cancel_exactly() {
    let game = make_benchmark(GameFamily::BilinearZeroSum, 2, 6, ConstraintKind::Affine, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..200 {
        let a = box_point(&mut rng, 12);
        assert_eq!(game.utility(0, &a).unwrap() + game.utility(1, &a).unwrap(), 0.0);
    }
}

#[test]
fn norm_min_game_is_monotone() {
    let game = make_benchmark(GameFamily::MonotoneNormMin, 5, 10, ConstraintKind::Affine, 5).unwrap();
    let layout = game.layout().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let own_gradient = |a: &[f64]| {
        let mut out = vec![0.0; a.len()];
        let mut full = vec![0.0; a.len()];
        for i in 0..layout.num_players() {
            game.utility_gradient(i, a, &mut full).unwrap();
            out[layout.range(i)].copy_from_slice(&full[layout.range(i)]);
        }
        out
    };
    for _ in 0..500 {
        let a = box_point(&mut rng, 50);
        let b = box_point(&mut rng, 50);
        let (ga, gb) = (own_gradient(&a), own_gradient(&b));
        let pairing: f64 = (0..50).map(|k| (ga[k] - gb[k]) * (a[k] - b[k])).sum();
        assert!(pairing <= 1e-8, "{pairing}");
    }
}

#[test]
fn utilities_are_concave_in_own_action() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for game in benchmarks() {
        let len = game.layout().total_len();
        for _ in 0..200 {
            let a = box_point(&mut rng, len);
            for i in 0..game.num_players() {
                let range = game.layout().range(i);
                let (mut x, mut y) = (a.clone(), a.clone());
                for k in range.clone() {
                    x[k] = rng.gen_range(-10.0..10.0);
                    y[k] = rng.gen_range(-10.0..10.0);
                }
                let mid: Vec<f64> = x.iter().zip(&y).map(|(p, q)| 0.5 * (p + q)).collect();
                let lhs = game.utility(i, &mid).unwrap();
                let rhs = 0.5 * (game.utility(i, &x).unwrap() + game.utility(i, &y).unwrap());
                assert!(lhs >= rhs - 1e-9, "{:?}: {lhs} < {rhs}", game.family());
            }
        }
    }
}

#[test]
fn benchmarks_contain_the_projected_origin() {
    for family in [GameFamily::BilinearZeroSum, GameFamily::BilinearGeneralSum, GameFamily::MonotoneNormMin] {
        for constraint in [ConstraintKind::Affine, ConstraintKind::Ball] {
            for seed in 0..5 {
                let game = make_benchmark(family, 3, 4, constraint, seed).unwrap();
                let set = game.feasible_set();
                let origin = set.project(&vec![0.0; set.dim()]).unwrap();
                assert!(is_feasible(set, origin.values(), 1e-9));
            }
        }
    }
}

#[test]
fn monotone_setup_has_five_players_of_dimension_ten() {
    let game = make_benchmark(GameFamily::MonotoneNormMin, 5, 10, ConstraintKind::Affine, 8).unwrap();
    assert_eq!(game.num_players(), 5);
    assert_eq!(game.layout().dims(), &[10; 5]);
    assert!(game.is_canonical());
    assert_eq!(game.lipschitz().grad_smoothness, 50.0);
    let again = make_benchmark(GameFamily::MonotoneNormMin, 5, 10, ConstraintKind::Affine, 8).unwrap();
    assert_eq!(game, again);
}
