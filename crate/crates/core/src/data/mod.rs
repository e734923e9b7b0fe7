//! Multi-label datasets: loading, saving, splitting and checking against
//! published dataset specifications.

mod arff;
mod delimited;

pub use arff::{load_arff, parse_arff, save_arff, LabelPosition};
pub use delimited::{
    load_delimited, load_features, parse_delimited, parse_features, save_delimited, write_delimited,
};

use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::metrics::{dataset_stats, DatasetStats};
use crate::multilabel::LabelMatrix;

/// N samples with D real features and M binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiLabelDataset {
    name: String,
    features: DenseMatrix,
    labels: LabelMatrix,
    feature_names: Vec<String>,
    label_names: Vec<String>,
    /// Number of input attributes before nominal one-hot expansion.
    source_feature_count: usize,
}

impl MultiLabelDataset {
    pub fn new(
        name: impl Into<String>,
        features: DenseMatrix,
        labels: LabelMatrix,
        feature_names: Vec<String>,
        label_names: Vec<String>,
    ) -> Result<Self> {
        let source_feature_count = features.cols();
        Self::with_source_count(name, features, labels, feature_names, label_names, source_feature_count)
    }

    pub(crate) fn with_source_count(
        name: impl Into<String>,
        features: DenseMatrix,
        labels: LabelMatrix,
        feature_names: Vec<String>,
        label_names: Vec<String>,
        source_feature_count: usize,
    ) -> Result<Self> {
        if features.rows() != labels.rows() {
            return Err(Error::shape(
                "MultiLabelDataset",
                format!("{} label rows", features.rows()),
                format!("{} label rows", labels.rows()),
            ));
        }
        if feature_names.len() != features.cols() {
            return Err(Error::shape(
                "MultiLabelDataset",
                format!("{} feature names", features.cols()),
                format!("{} feature names", feature_names.len()),
            ));
        }
        if label_names.len() != labels.cols() {
            return Err(Error::shape(
                "MultiLabelDataset",
                format!("{} label names", labels.cols()),
                format!("{} label names", label_names.len()),
            ));
        }
        Ok(Self {
            name: name.into(),
            features,
            labels,
            feature_names,
            label_names,
            source_feature_count,
        })
    }

    /// Dataset with generated names `x0..` and `y0..`.
    pub fn from_matrices(name: impl Into<String>, features: DenseMatrix, labels: LabelMatrix) -> Result<Self> {
        let fnames = (0..features.cols()).map(|j| format!("x{j}")).collect();
        let lnames = (0..labels.cols()).map(|j| format!("y{j}")).collect();
        Self::new(name, features, labels, fnames, lnames)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn features(&self) -> &DenseMatrix {
        &self.features
    }

    pub fn labels(&self) -> &LabelMatrix {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn feature_count(&self) -> usize {
        self.features.cols()
    }

    pub fn label_count(&self) -> usize {
        self.labels.cols()
    }

    pub fn source_feature_count(&self) -> usize {
        self.source_feature_count
    }

    /// Subset of rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            name: self.name.clone(),
            features: self.features.select_rows(indices),
            labels: self.labels.select_rows(indices),
            feature_names: self.feature_names.clone(),
            label_names: self.label_names.clone(),
            source_feature_count: self.source_feature_count,
        }
    }

    pub fn stats(&self) -> Result<DatasetStats> {
        dataset_stats(&self.labels, self.source_feature_count)
    }
}

/// Seeded shuffle, then the first `ceil(test_fraction · N)` samples form the
/// test side and the rest the training side.
pub fn split(dataset: &MultiLabelDataset, test_fraction: f64, seed: u64) -> Result<(MultiLabelDataset, MultiLabelDataset)> {
    let n = dataset.len();
    if n < 2 {
        return Err(Error::Input(format!("cannot split {n} samples")));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Input(format!("test fraction must lie in (0, 1), got {test_fraction}")));
    }
    // guard against 0.3 * 10 = 3.0000000000000004 style rounding
    let test_n = ((test_fraction * n as f64) - 1e-9).ceil().max(1.0) as usize;
    if test_n >= n {
        return Err(Error::Input(format!(
            "test fraction {test_fraction} leaves no training samples out of {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (test, train) = order.split_at(test_n);
    Ok((dataset.select(train), dataset.select(test)))
}

/// Expected shape and multi-labelness of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedSpec {
    pub name: String,
    pub features: usize,
    pub samples: usize,
    pub labels: usize,
    pub label_cardinality: f64,
    pub label_density: f64,
}

pub const CARDINALITY_TOLERANCE: f64 = 0.01;
pub const DENSITY_TOLERANCE: f64 = 0.002;

/// Published specifications of the six standard benchmark datasets:
/// (name, features, samples, labels, cardinality, density).
pub const BENCHMARK_SPECS: [(&str, usize, usize, usize, f64, f64); 6] = [
    ("emotions", 72, 593, 6, 1.87, 0.312),
    ("yeast", 103, 2417, 14, 4.24, 0.303),
    ("scene", 294, 2407, 6, 1.07, 0.178),
    ("corel5k", 499, 5000, 374, 3.52, 0.009),
    ("enron", 1001, 1702, 53, 3.38, 0.064),
    ("medical", 1449, 978, 45, 1.25, 0.027),
];

impl ExpectedSpec {
    pub fn from_stats(name: impl Into<String>, stats: &DatasetStats) -> Self {
        Self {
            name: name.into(),
            features: stats.features,
            samples: stats.samples,
            labels: stats.labels,
            label_cardinality: stats.label_cardinality,
            label_density: stats.label_density,
        }
    }

    /// Looks up a benchmark dataset by name (case-insensitive; "emotion"
    /// is accepted for "emotions").
    pub fn benchmark(name: &str) -> Option<Self> {
        let key = name.to_ascii_lowercase();
        let key = if key == "emotion" { "emotions".to_string() } else { key };
        BENCHMARK_SPECS
            .iter()
            .find(|s| s.0 == key)
            .map(|&(name, features, samples, labels, lc, ld)| Self {
                name: name.to_string(),
                features,
                samples,
                labels,
                label_cardinality: lc,
                label_density: ld,
            })
    }

    /// Parses `key=value` lines (`name`, `features`, `samples`, `labels`,
    /// `cardinality`, `density`). Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut name = String::new();
        let (mut features, mut samples, mut labels) = (None, None, None);
        let (mut lc, mut ld) = (None, None);
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: format!("expected key=value, got '{line}'"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| Error::Parse {
                line: i + 1,
                msg: format!("invalid {what} '{value}'"),
            };
            match key {
                "name" => name = value.to_string(),
                "features" => features = Some(value.parse().map_err(|_| bad("count"))?),
                "samples" => samples = Some(value.parse().map_err(|_| bad("count"))?),
                "labels" => labels = Some(value.parse().map_err(|_| bad("count"))?),
                "cardinality" => lc = Some(value.parse().map_err(|_| bad("number"))?),
                "density" => ld = Some(value.parse().map_err(|_| bad("number"))?),
                other => {
                    return Err(Error::Parse {
                        line: i + 1,
                        msg: format!("unknown key '{other}'"),
                    })
                }
            }
        }
        let missing = |k: &str| Error::Input(format!("expected-spec file lacks '{k}'"));
        Ok(Self {
            name,
            features: features.ok_or_else(|| missing("features"))?,
            samples: samples.ok_or_else(|| missing("samples"))?,
            labels: labels.ok_or_else(|| missing("labels"))?,
            label_cardinality: lc.ok_or_else(|| missing("cardinality"))?,
            label_density: ld.ok_or_else(|| missing("density"))?,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        format!(
            "name={}\nfeatures={}\nsamples={}\nlabels={}\ncardinality={}\ndensity={}\n",
            self.name, self.features, self.samples, self.labels, self.label_cardinality, self.label_density
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldCheck {
    pub field: &'static str,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecReport {
    pub dataset: String,
    pub checks: Vec<FieldCheck>,
}

impl SpecReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &FieldCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

impl fmt::Display for SpecReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{}\t{}\texpected {}\tactual {}",
                if c.pass { "PASS" } else { "FAIL" },
                c.field,
                c.expected,
                c.actual
            )?;
        }
        Ok(())
    }
}

/// Compares sample, feature and label counts exactly and cardinality /
/// density within [`CARDINALITY_TOLERANCE`] / [`DENSITY_TOLERANCE`].
/// Features are counted before nominal expansion.
pub fn verify_against_spec(dataset: &MultiLabelDataset, expected: &ExpectedSpec) -> SpecReport {
    let mut checks = Vec::with_capacity(5);
    let mut exact = |field, exp: usize, act: usize| {
        checks.push(FieldCheck {
            field,
            expected: exp.to_string(),
            actual: act.to_string(),
            pass: exp == act,
        })
    };
    exact("samples", expected.samples, dataset.len());
    exact("features", expected.features, dataset.source_feature_count());
    exact("labels", expected.labels, dataset.label_count());
    let (lc, ld) = match dataset.stats() {
        Ok(s) => (s.label_cardinality, s.label_density),
        Err(_) => (f64::NAN, f64::NAN),
    };
    let mut approx = |field, exp: f64, act: f64, tol: f64| {
        checks.push(FieldCheck {
            field,
            expected: format!("{exp}±{tol}"),
            actual: format!("{act:.4}"),
            pass: (exp - act).abs() <= tol + 1e-12,
        })
    };
    approx("cardinality", expected.label_cardinality, lc, CARDINALITY_TOLERANCE);
    approx("density", expected.label_density, ld, DENSITY_TOLERANCE);
    SpecReport {
        dataset: dataset.name().to_string(),
        checks,
    }
}

/// Loads `.arff` files with the ARFF reader and anything else as
/// comma-delimited text.
pub fn load_any(path: &Path, label_count: usize, position: LabelPosition, delimiter: char) -> Result<MultiLabelDataset> {
    let is_arff = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("arff"));
    if is_arff {
        load_arff(path, label_count, position)
    } else {
        load_delimited(path, label_count, delimiter)
    }
}

pub(crate) fn dataset_name_from_path(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("dataset")
        .to_string()
}
