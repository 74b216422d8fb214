use gne_core::{Matrix, ProfileLayout, StrategyProfile};
use gne_oracles::largest_singular_value;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Matrix::from_row_major(rows, cols, data).unwrap()
}

#[test]
fn spectral_norm_matches_dense_svd() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let m = random_matrix(&mut rng, 5, 5);
        let expected = largest_singular_value(5, 5, m.data());
        let got = m.spectral_norm().unwrap();
        assert!((got - expected).abs() <= 1e-8, "{got} vs {expected}");
    }
    for (rows, cols) in [(3, 7), (10, 10), (1, 4)] {
        let m = random_matrix(&mut rng, rows, cols);
        let expected = largest_singular_value(rows, cols, m.data());
        assert!((m.spectral_norm().unwrap() - expected).abs() <= 1e-8 * expected.max(1.0));
    }
}

#[test]
fn spectral_norm_bounds_matrix_vector_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let m = random_matrix(&mut rng, 10, 10);
    let bound = m.spectral_norm().unwrap();
    for _ in 0..100 {
        let x: Vec<f64> = (0..10).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let mx = m.mul_vec(&x);
        let lhs = mx.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rhs = bound * x.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(lhs <= rhs + 1e-8);
    }
}

#[test]
fn spectral_norm_is_absolutely_homogeneous() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let m = random_matrix(&mut rng, 6, 6);
    let base = m.spectral_norm().unwrap();
    for factor in [-3.5, -1.0, 0.25, 2.0, 1e3] {
        let scaled = m.scaled(factor).spectral_norm().unwrap();
        assert!((scaled - factor.abs() * base).abs() <= 1e-9 * factor.abs() * base);
    }
}

proptest! {
    #[test]
    fn replacing_a_block_with_itself_is_bitwise_identity(
        dims in prop::collection::vec(1usize..4, 1..5),
        seed in any::<u64>(),
    ) {
        let layout = ProfileLayout::new(dims).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..layout.total_len()).map(|_| rng.gen_range(-1e3..1e3)).collect();
        let profile = StrategyProfile::new(layout.clone(), values).unwrap();
        for player in 0..layout.num_players() {
            let block = profile.block(player).unwrap().to_vec();
            let same = profile.replace_block(player, &block).unwrap();
            let lhs: Vec<u64> = same.values().iter().map(|v| v.to_bits()).collect();
            let rhs: Vec<u64> = profile.values().iter().map(|v| v.to_bits()).collect();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
