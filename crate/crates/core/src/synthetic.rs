//! Seeded synthetic multi-label datasets for tests, benchmarks and
//! fallback fixtures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::MultiLabelDataset;
use crate::linalg::DenseMatrix;
use crate::multilabel::LabelMatrix;

/// Features uniform on `[-1, 1]^d`; label `j` is `w_j · x + c_j + ε > 0`
/// for random hyperplanes `(w_j, c_j)` and noise `ε` uniform on
/// `[-noise, noise]`. Samples closer than `margin` to any hyperplane (before
/// noise) are redrawn, so `noise = 0, margin > 0` gives separable labels.
pub fn linear_threshold(n: usize, d: usize, m: usize, noise: f64, margin: f64, seed: u64) -> MultiLabelDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planes: Vec<(Vec<f64>, f64)> = (0..m)
        .map(|_| {
            let w: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
            let w = w.into_iter().map(|v| v / norm).collect();
            (w, rng.random_range(-0.3..0.3))
        })
        .collect();
    let mut x = Vec::with_capacity(n * d);
    let mut y = Vec::with_capacity(n * m);
    let mut row = vec![0.0; d];
    let mut accepted = 0;
    let mut attempts = 0usize;
    while accepted < n {
        attempts += 1;
        assert!(attempts < 1000 * n + 10_000, "margin {margin} too large to sample {n} points");
        row.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
        let scores: Vec<f64> = planes
            .iter()
            .map(|(w, c)| w.iter().zip(&row).map(|(a, b)| a * b).sum::<f64>() + c)
            .collect();
        if scores.iter().any(|s| s.abs() < margin) {
            continue;
        }
        x.extend_from_slice(&row);
        for s in scores {
            let eps = if noise > 0.0 { rng.random_range(-noise..noise) } else { 0.0 };
            y.push(u8::from(s + eps > 0.0));
        }
        accepted += 1;
    }
    let x = DenseMatrix::new(n, d, x).expect("finite features");
    let y = LabelMatrix::new(n, m, y).expect("binary labels");
    MultiLabelDataset::from_matrices("synthetic", x, y).expect("consistent shapes")
}
