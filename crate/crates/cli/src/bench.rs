//! Wall-clock timing of training and testing. Only `train` and the
//! raw-score + threshold path are inside the timed region; parsing and file
//! I/O are not.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use mlelm_core::data::{load_any, split, LabelPosition};
use mlelm_core::elm::train;
use mlelm_core::multilabel::decode_scores;
use mlelm_core::{ElmConfig, Error, MultiLabelDataset, Result};

use crate::commands::{emit, require_input, require_optional_output_path};
use crate::report::write_file;
use crate::{BenchArgs, EXIT_ERROR, EXIT_OK};

/// Seed of the train/test split used for timing.
pub const SPLIT_SEED: u64 = 0;

#[derive(Debug, Clone, PartialEq)]
pub struct TimingReport {
    pub dataset: String,
    pub n_train: usize,
    pub n_test: usize,
    pub hidden: usize,
    /// Median over repeats.
    pub train_seconds: f64,
    /// Median over repeats.
    pub test_seconds: f64,
    pub raw_train: Vec<f64>,
    pub raw_test: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingPoint {
    pub fraction: f64,
    pub samples: usize,
    /// Median training time over repeats.
    pub train_seconds: f64,
}

pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of no values");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

/// Times `repeats` train runs on the training side of a seeded split and
/// `repeats` prediction runs on the test side.
pub fn time_dataset(
    dataset: &MultiLabelDataset,
    config: &ElmConfig,
    test_fraction: f64,
    repeats: usize,
) -> Result<TimingReport> {
    if repeats == 0 {
        return Err(Error::Input("repeats must be >= 1".into()));
    }
    let (train_set, test_set) = split(dataset, test_fraction, SPLIT_SEED)?;
    let mut raw_train = Vec::with_capacity(repeats);
    let mut raw_test = Vec::with_capacity(repeats);
    let mut model = None;
    for _ in 0..repeats {
        let start = Instant::now();
        let m = train(&train_set, config)?;
        raw_train.push(start.elapsed().as_secs_f64());
        model = Some(m);
    }
    let model = model.expect("repeats >= 1");
    for _ in 0..repeats {
        let start = Instant::now();
        let scores = model.raw_predict(test_set.features())?;
        let labels = decode_scores(&model, &scores);
        raw_test.push(start.elapsed().as_secs_f64());
        std::hint::black_box(labels);
    }
    Ok(TimingReport {
        dataset: dataset.name().to_string(),
        n_train: train_set.len(),
        n_test: test_set.len(),
        hidden: config.hidden_neurons,
        train_seconds: median(&raw_train),
        test_seconds: median(&raw_test),
        raw_train,
        raw_test,
    })
}

/// Median training time on the first `fraction · N` samples of a seeded
/// shuffle, for each fraction.
pub fn scaling_probe(
    dataset: &MultiLabelDataset,
    config: &ElmConfig,
    fractions: &[f64],
    repeats: usize,
    seed: u64,
) -> Result<Vec<ScalingPoint>> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    if repeats == 0 {
        return Err(Error::Input("repeats must be >= 1".into()));
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
    fractions
        .iter()
        .map(|&fraction| {
            if !(fraction > 0.0 && fraction <= 1.0) {
                return Err(Error::Input(format!("scaling fraction {fraction} outside (0, 1]")));
            }
            let n = ((fraction * dataset.len() as f64).round() as usize).max(1);
            let subset = dataset.select(&order[..n]);
            let times = (0..repeats)
                .map(|_| {
                    let start = Instant::now();
                    train(&subset, config).map(|m| {
                        std::hint::black_box(m);
                        start.elapsed().as_secs_f64()
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ScalingPoint {
                fraction,
                samples: n,
                train_seconds: median(&times),
            })
        })
        .collect()
}

fn label_count_for(args: &BenchArgs, index: usize) -> Result<usize> {
    match args.label_counts.as_slice() {
        [single] => Ok(*single),
        many if many.len() == args.datasets.len() => Ok(many[index]),
        many => Err(Error::Input(format!(
            "{} label counts given for {} datasets",
            many.len(),
            args.datasets.len()
        ))),
    }
}

fn bench_one(args: &BenchArgs, path: &Path, label_count: usize) -> Result<(TimingReport, Vec<ScalingPoint>)> {
    let position = if args.labels_first { LabelPosition::Start } else { LabelPosition::End };
    let ds = load_any(path, label_count, position, args.delimiter)?;
    let config = args.model_args.config(ds.feature_count(), ds.label_count());
    let timing = time_dataset(&ds, &config, args.test_fraction, args.repeats)?;
    let scaling = if args.scaling.is_empty() {
        Vec::new()
    } else {
        scaling_probe(&ds, &config, &args.scaling, args.repeats, args.model_args.seed)?
    };
    Ok((timing, scaling))
}

/// One row per dataset; a failing dataset gets an `ERROR` row and the rest
/// still run. Exit status is 1 if any dataset failed.
pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    for p in &args.datasets {
        require_input(p)?;
    }
    require_optional_output_path(args.report.as_deref())?;
    label_count_for(args, 0)?;

    let mut table = String::from("dataset\tn_train\tn_test\thidden\ttrain_s\ttest_s\n");
    let mut scaling_rows = String::new();
    let mut failed = false;
    for (i, path) in args.datasets.iter().enumerate() {
        let label_count = label_count_for(args, i)?;
        match bench_one(args, path, label_count) {
            Ok((t, scaling)) => {
                let _ = writeln!(
                    table,
                    "{}\t{}\t{}\t{}\t{:.4}\t{:.4}",
                    t.dataset, t.n_train, t.n_test, t.hidden, t.train_seconds, t.test_seconds
                );
                let _ = writeln!(err, "raw_train\t{}\t{}", t.dataset, join(&t.raw_train));
                let _ = writeln!(err, "raw_test\t{}\t{}", t.dataset, join(&t.raw_test));
                for p in scaling {
                    let _ = writeln!(
                        scaling_rows,
                        "{}\t{}\t{}\t{:.4}",
                        t.dataset, p.fraction, p.samples, p.train_seconds
                    );
                }
            }
            Err(e) => {
                failed = true;
                let _ = writeln!(table, "{}\tERROR\t{e}", path.display());
            }
        }
    }
    if !scaling_rows.is_empty() {
        table.push_str("\ndataset\tfraction\tsamples\ttrain_s\n");
        table.push_str(&scaling_rows);
    }
    emit(out, &table)?;
    if let Some(path) = &args.report {
        write_file(path, table.as_bytes())?;
    }
    Ok(if failed { EXIT_ERROR } else { EXIT_OK })
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use mlelm_core::synthetic::linear_threshold;

    #[test]
    fn median_of_odd_and_even() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn timing_report_shapes() {
        let ds = linear_threshold(50, 4, 3, 0.0, 0.0, 1);
        let t = time_dataset(&ds, &ElmConfig::new(20), 0.2, 3).unwrap();
        assert_eq!((t.n_train, t.n_test, t.hidden), (40, 10, 20));
        assert_eq!(t.raw_train.len(), 3);
        assert!(t.train_seconds >= 0.0 && t.test_seconds >= 0.0);
        let p = scaling_probe(&ds, &ElmConfig::new(20), &[0.5, 1.0], 1, 0).unwrap();
        assert_eq!(p.iter().map(|p| p.samples).collect::<Vec<_>>(), [25, 50]);
    }
}
