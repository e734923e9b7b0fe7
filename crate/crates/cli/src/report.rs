//! Text renderings of results. Tables use 4 decimals; `key=value` report
//! blocks use the shortest round-trip float form.

use std::fmt::Write as _;
use std::path::Path;

use mlelm_core::cv::CvReport;
use mlelm_core::elm::TrainSummary;
use mlelm_core::metrics::{DatasetStats, MetricsReport};
use mlelm_core::multilabel::ThresholdMethod;
use mlelm_core::{ElmModel, Error, LabelMatrix, Result};

pub fn stats_table(name: &str, stats: &DatasetStats, encoded_features: usize) -> String {
    format!(
        "dataset\t{name}\nsamples\t{}\nfeatures\t{}\nencoded_features\t{encoded_features}\nlabels\t{}\ncardinality\t{:.4}\ndensity\t{:.4}\n",
        stats.samples, stats.features, stats.labels, stats.label_cardinality, stats.label_density
    )
}

pub fn metrics_table(name: &str, m: &MetricsReport) -> String {
    let mut s = String::from("dataset");
    for n in MetricsReport::NAMES {
        s.push('\t');
        s.push_str(n);
    }
    s.push('\n');
    s.push_str(name);
    for v in m.values() {
        let _ = write!(s, "\t{v:.4}");
    }
    s.push('\n');
    s
}

/// `prefix.metric=value` lines (no prefix when empty).
pub fn metrics_key_values(prefix: &str, m: &MetricsReport) -> String {
    let dot = if prefix.is_empty() { "" } else { "." };
    let mut s = String::new();
    for (n, v) in MetricsReport::NAMES.iter().zip(m.values()) {
        let _ = writeln!(s, "{prefix}{dot}{n}={v}");
    }
    s
}

/// Per-fold table followed by one `metric: mean(±std)` line per metric.
pub fn cv_table(report: &CvReport) -> String {
    let mut s = String::from("fold");
    for n in MetricsReport::NAMES {
        s.push('\t');
        s.push_str(n);
    }
    s.push('\n');
    for (i, fold) in report.per_fold.iter().enumerate() {
        let _ = write!(s, "{i}");
        for v in fold.values() {
            let _ = write!(s, "\t{v:.4}");
        }
        s.push('\n');
    }
    for ((n, mean), std) in MetricsReport::NAMES.iter().zip(report.mean.values()).zip(report.stddev.values()) {
        let _ = writeln!(s, "{n}: {mean:.4}(±{std:.4})");
    }
    s
}

pub fn cv_key_values(report: &CvReport) -> String {
    let mut s = format!("k={}\nseed={}\n", report.k, report.seed);
    for (i, fold) in report.per_fold.iter().enumerate() {
        s.push_str(&metrics_key_values(&format!("fold{i}"), fold));
    }
    s.push_str(&metrics_key_values("mean", &report.mean));
    s.push_str(&metrics_key_values("std", &report.stddev));
    s
}

pub fn train_summary(name: &str, samples: usize, model: &ElmModel, summary: &TrainSummary) -> String {
    let c = model.config();
    let mut s = format!(
        "dataset={name}\nsamples={samples}\nfeatures={}\nlabels={}\nhidden={}\nactivation={}\nseed={}\nridge={}\nthreshold={}\nthreshold_method={}\n",
        model.feature_count(),
        model.label_count(),
        model.hidden_count(),
        model.activation(),
        c.seed,
        summary.ridge,
        model.threshold(),
        match model.threshold_method() {
            ThresholdMethod::Fixed => "fixed",
            ThresholdMethod::MidpointCalibrated => "calibrated",
        },
    );
    if let Some(t) = &summary.threshold {
        let _ = write!(s, "margin={}\nmisclassified_cells={}\n", t.margin, t.misclassified);
    }
    let _ = writeln!(s, "relative_residual={}", summary.relative_residual);
    s
}

/// One prediction line: comma-separated label names, then optionally a tab
/// and the comma-separated raw scores.
pub fn prediction_line(names: &[String], labels: &[u8], scores: Option<&[f64]>) -> String {
    let mut s = String::new();
    for (name, _) in names.iter().zip(labels).filter(|(_, &l)| l == 1) {
        if !s.is_empty() {
            s.push(',');
        }
        s.push_str(name);
    }
    if let Some(scores) = scores {
        s.push('\t');
        for (j, v) in scores.iter().enumerate() {
            if j > 0 {
                s.push(',');
            }
            let _ = write!(s, "{v:.6}");
        }
    }
    s.push('\n');
    s
}

/// Inverse of [`prediction_line`]; anything after a tab is ignored.
pub fn parse_predictions(text: &str, names: &[String]) -> Result<LabelMatrix> {
    let mut sets = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let labels = line.split('\t').next().unwrap_or("");
        let mut set = Vec::new();
        for token in labels.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let j = names.iter().position(|n| n == token).ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: format!("unknown label '{token}'"),
            })?;
            set.push(j);
        }
        sets.push(set);
    }
    LabelMatrix::from_sets(names.len(), &sets)
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}
