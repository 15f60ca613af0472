//! Seeded inputs shared by the benchmarks.

use fft_core::synth::{clean_suite, generate, occlusion_suite, Synthetic};
use fft_core::BBox;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` random boxes with scores in a 640×480 frame, clustered so NMS has work to do.
pub fn scored_boxes(n: usize, seed: u64) -> Vec<(BBox, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x = rng.random_range(0.0..600.0);
            let y = rng.random_range(0.0..440.0);
            let w = rng.random_range(10.0..80.0);
            let h = rng.random_range(10.0..80.0);
            (BBox::new(x, y, w, h).unwrap(), rng.random::<f64>())
        })
        .collect()
}

/// Square matrix of uniform costs in `[0, 1)`.
pub fn cost_matrix(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
        .collect()
}

/// First sequence of the clean suite.
pub fn clean_sequence() -> Synthetic {
    generate(&clean_suite(1)[0].1).unwrap()
}

/// First sequence of the occlusion suite.
pub fn occluded_sequence() -> Synthetic {
    generate(&occlusion_suite(1)[0].1).unwrap()
}
