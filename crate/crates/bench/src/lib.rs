//! Fixed inputs shared by the criterion benches.

use mlelm_core::synthetic::linear_threshold;
use mlelm_core::{DenseMatrix, MultiLabelDataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// (name, samples, features, labels) of the benchmarked problem sizes.
pub const SHAPES: [(&str, usize, usize, usize); 3] =
    [("emotions", 593, 72, 6), ("yeast", 2417, 103, 14), ("scene", 2407, 294, 6)];

pub fn dataset(samples: usize, features: usize, labels: usize) -> MultiLabelDataset {
    linear_threshold(samples, features, labels, 0.05, 0.0, 7)
}

/// Entries uniform in [-1, 1).
pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0)).expect("finite entries")
}
