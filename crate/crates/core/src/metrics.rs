//! Example-based multi-label evaluation metrics and dataset multi-labelness
//! statistics.
//!
//! For sample `i` with true label set `Yᵢ` and predicted set `Zᵢ`:
//!
//! | metric    | per-sample value            |
//! |-----------|-----------------------------|
//! | accuracy  | `|Yᵢ∩Zᵢ| / |Yᵢ∪Zᵢ|`         |
//! | precision | `|Yᵢ∩Zᵢ| / |Zᵢ|`            |
//! | recall    | `|Yᵢ∩Zᵢ| / |Yᵢ|`            |
//! | f1        | `2|Yᵢ∩Zᵢ| / (|Yᵢ| + |Zᵢ|)`  |
//!
//! and the report holds the mean over samples. When both sets are empty all
//! four are 1; when only one is empty any ratio with a zero denominator is 0.
//! Means are accumulated as exact rationals and converted to `f64` once.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::multilabel::LabelMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub hamming_loss: f64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub sample_count: usize,
}

impl MetricsReport {
    /// Metric values in the fixed order hamming, accuracy, precision, recall, f1.
    pub fn values(&self) -> [f64; 5] {
        [self.hamming_loss, self.accuracy, self.precision, self.recall, self.f1]
    }

    pub fn from_values(values: [f64; 5], sample_count: usize) -> Self {
        Self {
            hamming_loss: values[0],
            accuracy: values[1],
            precision: values[2],
            recall: values[3],
            f1: values[4],
            sample_count,
        }
    }

    pub const NAMES: [&'static str; 5] = ["hamming_loss", "accuracy", "precision", "recall", "f1"];
}

/// Exact sum of non-negative rationals, bucketed by denominator.
#[derive(Default)]
struct ExactSum {
    by_denominator: BTreeMap<u64, u64>,
}

impl ExactSum {
    fn add(&mut self, numerator: u64, denominator: u64) {
        debug_assert!(denominator > 0);
        if numerator > 0 {
            *self.by_denominator.entry(denominator).or_insert(0) += numerator;
        }
    }

    fn mean(&self, count: usize) -> f64 {
        let mut total = BigRational::zero();
        for (&d, &n) in &self.by_denominator {
            total += BigRational::new(BigInt::from(n), BigInt::from(d));
        }
        let mean = total / BigRational::from_integer(BigInt::from(count));
        mean.to_f64().expect("bounded ratio converts to f64")
    }
}

fn check_pair(predicted: &LabelMatrix, truth: &LabelMatrix, op: &'static str) -> Result<()> {
    if predicted.shape() != truth.shape() {
        return Err(Error::shape(
            op,
            format!("{}x{}", truth.rows(), truth.cols()),
            format!("{}x{}", predicted.rows(), predicted.cols()),
        ));
    }
    if truth.rows() == 0 || truth.cols() == 0 {
        return Err(Error::Input(format!("{op}: empty label matrix")));
    }
    Ok(())
}

/// Fraction of label cells where prediction and truth disagree.
pub fn hamming_loss(predicted: &LabelMatrix, truth: &LabelMatrix) -> Result<f64> {
    check_pair(predicted, truth, "hamming_loss")?;
    let wrong = predicted
        .as_slice()
        .iter()
        .zip(truth.as_slice())
        .filter(|(a, b)| a != b)
        .count();
    Ok(wrong as f64 / (truth.rows() * truth.cols()) as f64)
}

/// All five metrics over one evaluation run.
pub fn example_based_metrics(predicted: &LabelMatrix, truth: &LabelMatrix) -> Result<MetricsReport> {
    let hamming = hamming_loss(predicted, truth)?;
    let mut accuracy = ExactSum::default();
    let mut precision = ExactSum::default();
    let mut recall = ExactSum::default();
    let mut f1 = ExactSum::default();
    for i in 0..truth.rows() {
        let (mut inter, mut union, mut y, mut z) = (0u64, 0u64, 0u64, 0u64);
        for (&p, &t) in predicted.row(i).iter().zip(truth.row(i)) {
            inter += (p & t) as u64;
            union += (p | t) as u64;
            y += t as u64;
            z += p as u64;
        }
        if union == 0 {
            for acc in [&mut accuracy, &mut precision, &mut recall, &mut f1] {
                acc.add(1, 1);
            }
            continue;
        }
        accuracy.add(inter, union);
        if z > 0 {
            precision.add(inter, z);
        }
        if y > 0 {
            recall.add(inter, y);
        }
        f1.add(2 * inter, y + z);
    }
    let n = truth.rows();
    Ok(MetricsReport {
        hamming_loss: hamming,
        accuracy: accuracy.mean(n),
        precision: precision.mean(n),
        recall: recall.mean(n),
        f1: f1.mean(n),
        sample_count: n,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats {
    /// Mean number of labels per sample.
    pub label_cardinality: f64,
    /// Label cardinality divided by the label-space size.
    pub label_density: f64,
    pub samples: usize,
    pub labels: usize,
    pub features: usize,
}

pub fn dataset_stats(labels: &LabelMatrix, features: usize) -> Result<DatasetStats> {
    let (n, m) = labels.shape();
    if n == 0 || m == 0 {
        return Err(Error::Input("dataset_stats needs at least one sample and one label".into()));
    }
    let lc = labels.total_count() as f64 / n as f64;
    Ok(DatasetStats {
        label_cardinality: lc,
        label_density: lc / m as f64,
        samples: n,
        labels: m,
        features,
    })
}
