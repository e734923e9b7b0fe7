//! Seeded k-fold cross-validation with per-fold retraining.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::MultiLabelDataset;
use crate::elm::{self, ElmConfig, ElmModel};
use crate::error::{Error, Result};
use crate::metrics::{example_based_metrics, MetricsReport};
use crate::multilabel;

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub k: usize,
    pub per_fold: Vec<MetricsReport>,
    pub mean: MetricsReport,
    /// Population standard deviation (divide by k) of each metric.
    pub stddev: MetricsReport,
    pub seed: u64,
}

/// Shuffles `0..n` with `seed` and cuts the permutation into `k` contiguous
/// chunks; the first `n % k` chunks get one extra index.
pub fn kfold_partition(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(Error::Input(format!("k must satisfy 2 <= k <= n, got k={k}, n={n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(order[start..start + len].to_vec());
        start += len;
    }
    Ok(folds)
}

/// Config used for fold `fold`: hidden weights are reseeded with
/// `seed + fold` so every fold draws a fresh network.
pub fn fold_config(config: &ElmConfig, seed: u64, fold: usize) -> ElmConfig {
    config.clone().with_seed(seed.wrapping_add(fold as u64))
}

/// Training indices for `fold`: every other fold, in fold order.
pub fn training_indices(folds: &[Vec<usize>], fold: usize) -> Vec<usize> {
    folds
        .iter()
        .enumerate()
        .filter(|&(f, _)| f != fold)
        .flat_map(|(_, idx)| idx.iter().copied())
        .collect()
}

/// Trains the model for one fold from its training folds only.
pub fn train_fold(
    dataset: &MultiLabelDataset,
    folds: &[Vec<usize>],
    fold: usize,
    config: &ElmConfig,
    seed: u64,
) -> Result<ElmModel> {
    let train = dataset.select(&training_indices(folds, fold));
    elm::train(&train, &fold_config(config, seed, fold))
}

fn evaluate_fold(
    dataset: &MultiLabelDataset,
    folds: &[Vec<usize>],
    fold: usize,
    config: &ElmConfig,
    seed: u64,
) -> Result<MetricsReport> {
    let model = train_fold(dataset, folds, fold, config, seed)?;
    let test = dataset.select(&folds[fold]);
    let predicted = multilabel::predict_labels(&model, test.features())?;
    example_based_metrics(&predicted, test.labels())
}

/// Mean and population standard deviation of each metric over folds.
pub fn summarize(per_fold: &[MetricsReport]) -> (MetricsReport, MetricsReport) {
    let k = per_fold.len() as f64;
    let samples: usize = per_fold.iter().map(|r| r.sample_count).sum();
    let mut mean = [0.0; 5];
    let mut std = [0.0; 5];
    for m in 0..5 {
        let vals: Vec<f64> = per_fold.iter().map(|r| r.values()[m]).collect();
        if vals.iter().all(|&v| v == vals[0]) {
            mean[m] = vals[0];
            continue;
        }
        let mu = vals.iter().sum::<f64>() / k;
        mean[m] = mu;
        std[m] = (vals.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / k).sqrt();
    }
    (
        MetricsReport::from_values(mean, samples),
        MetricsReport::from_values(std, samples),
    )
}

/// Runs k-fold cross-validation. Each fold fits normalization, hidden
/// weights, output weights and threshold on its training folds only.
/// Folds run in parallel; results are ordered by fold index.
pub fn cross_validate(dataset: &MultiLabelDataset, config: &ElmConfig, k: usize, seed: u64) -> Result<CvReport> {
    let folds = kfold_partition(dataset.len(), k, seed)?;
    let results: Vec<Result<MetricsReport>> = (0..k)
        .into_par_iter()
        .map(|f| evaluate_fold(dataset, &folds, f, config, seed))
        .collect();
    let mut per_fold = Vec::with_capacity(k);
    for (index, r) in results.into_iter().enumerate() {
        per_fold.push(r.map_err(|e| Error::Fold {
            index,
            source: Box::new(e),
        })?);
    }
    let (mean, stddev) = summarize(&per_fold);
    Ok(CvReport {
        k,
        per_fold,
        mean,
        stddev,
        seed,
    })
}
