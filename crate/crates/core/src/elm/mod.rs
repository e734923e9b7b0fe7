//! Extreme learning machine: a single-hidden-layer feedforward network whose
//! input weights and biases are drawn at random and frozen, and whose output
//! weights are the least-squares solution `β = H⁺Y` of `Hβ = Y`.

mod codec;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::MultiLabelDataset;
use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};
use crate::multilabel::{self, ThresholdMethod, ThresholdReport};

/// Hidden biases are drawn uniformly from this interval.
pub const BIAS_RANGE: (f64, f64) = (0.0, 1.0);

/// Scale factor of the automatic ridge: `AUTO_RIDGE_FACTOR · trace(HᵀH) / Ñ`.
pub const AUTO_RIDGE_FACTOR: f64 = 1e-8;

/// Hidden-layer activation `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Sigmoid,
    Tanh,
    /// Step function: 1 for inputs ≥ 0, else 0.
    HardLimit,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            Activation::Tanh => x.tanh(),
            Activation::HardLimit => {
                if x >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn id(self) -> u8 {
        match self {
            Activation::Sigmoid => 0,
            Activation::Tanh => 1,
            Activation::HardLimit => 2,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            0 => Some(Activation::Sigmoid),
            1 => Some(Activation::Tanh),
            2 => Some(Activation::HardLimit),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
            Activation::HardLimit => "hardlimit",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sigmoid" | "sig" => Ok(Activation::Sigmoid),
            "tanh" => Ok(Activation::Tanh),
            "hardlimit" | "hardlim" | "step" => Ok(Activation::HardLimit),
            other => Err(Error::Input(format!("unknown activation '{other}'"))),
        }
    }
}

/// Regularization added to the Gram matrix before factoring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ridge {
    /// Exactly this value; `Fixed(0.0)` is the unregularized pseudoinverse.
    Fixed(f64),
    /// `AUTO_RIDGE_FACTOR · trace(HᵀH) / Ñ`, resolved per training set.
    Auto,
}

impl Ridge {
    /// Resolves the ridge for a concrete hidden-layer output matrix.
    pub fn resolve(self, hidden: &DenseMatrix) -> f64 {
        match self {
            Ridge::Fixed(r) => r,
            Ridge::Auto => {
                // trace(HᵀH) is the squared Frobenius norm of H
                let trace: f64 = hidden.as_slice().iter().map(|v| v * v).sum();
                AUTO_RIDGE_FACTOR * trace / hidden.cols().max(1) as f64
            }
        }
    }
}

impl FromStr for Ridge {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Ridge::Auto);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::Input(format!("ridge must be 'auto' or a number, got '{s}'")))?;
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::Input(format!("ridge must be >= 0, got {v}")));
        }
        Ok(Ridge::Fixed(v))
    }
}

/// Where the decision threshold comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdMode {
    /// Calibrated on the training raw outputs; falls back to 0 when the
    /// training labels are all-positive or all-negative.
    Auto,
    Fixed(f64),
}

impl FromStr for ThresholdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(ThresholdMode::Auto);
        }
        let v = s
            .strip_prefix("fixed:")
            .and_then(|v| v.parse::<f64>().ok())
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Input(format!("threshold must be 'auto' or 'fixed:<value>', got '{s}'")))?;
        Ok(ThresholdMode::Fixed(v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElmConfig {
    /// Ñ, the number of hidden neurons.
    pub hidden_neurons: usize,
    pub activation: Activation,
    pub seed: u64,
    pub ridge: Ridge,
    /// Input weights are drawn uniformly from `[lo, hi)`.
    pub weight_range: (f64, f64),
    pub threshold: ThresholdMode,
    /// Force the argmax label on rows that would otherwise decode empty.
    pub top1_fallback: bool,
}

impl ElmConfig {
    pub fn new(hidden_neurons: usize) -> Self {
        Self {
            hidden_neurons,
            activation: Activation::Sigmoid,
            seed: 0,
            ridge: Ridge::Auto,
            weight_range: (-1.0, 1.0),
            threshold: ThresholdMode::Auto,
            top1_fallback: false,
        }
    }

    /// `min(1000, 10·M + 2·D)`
    pub fn default_hidden(features: usize, labels: usize) -> usize {
        (10 * labels + 2 * features).clamp(1, 1000)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_activation(mut self, activation: Activation) -> Self {
        self.activation = activation;
        self
    }

    pub fn with_ridge(mut self, ridge: Ridge) -> Self {
        self.ridge = ridge;
        self
    }

    pub fn with_threshold(mut self, threshold: ThresholdMode) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden_neurons == 0 {
            return Err(Error::Input("hidden_neurons must be >= 1".into()));
        }
        let (lo, hi) = self.weight_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Input(format!("weight range [{lo}, {hi}) is empty or non-finite")));
        }
        if let Ridge::Fixed(r) = self.ridge {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(Error::Input(format!("ridge must be >= 0, got {r}")));
            }
        }
        if let ThresholdMode::Fixed(t) = self.threshold {
            if !t.is_finite() {
                return Err(Error::Input("fixed threshold must be finite".into()));
            }
        }
        Ok(())
    }
}

/// Per-feature affine map `x' = (x - shift) · scale` sending the training
/// range of each feature onto `[-1, 1]`. Constant features map to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub shift: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Normalization {
    pub fn identity(features: usize) -> Self {
        Self {
            shift: vec![0.0; features],
            scale: vec![1.0; features],
        }
    }

    pub fn fit(x: &DenseMatrix) -> Self {
        let d = x.cols();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for row in x.row_iter() {
            for (j, &v) in row.iter().enumerate() {
                lo[j] = lo[j].min(v);
                hi[j] = hi[j].max(v);
            }
        }
        let mut shift = Vec::with_capacity(d);
        let mut scale = Vec::with_capacity(d);
        for j in 0..d {
            let width = hi[j] - lo[j];
            if x.rows() == 0 || width <= 0.0 || !width.is_finite() {
                shift.push(if x.rows() == 0 { 0.0 } else { lo[j] });
                scale.push(0.0);
            } else {
                shift.push(lo[j] + width / 2.0);
                scale.push(2.0 / width);
            }
        }
        Self { shift, scale }
    }

    pub fn len(&self) -> usize {
        self.shift.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shift.is_empty()
    }

    pub fn apply(&self, x: &DenseMatrix) -> DenseMatrix {
        let d = x.cols();
        debug_assert_eq!(d, self.len());
        let mut out = x.as_slice().to_vec();
        for row in out.chunks_exact_mut(d.max(1)) {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - self.shift[j]) * self.scale[j];
            }
        }
        DenseMatrix::from_raw(x.rows(), d, out)
    }
}

/// Draws the frozen random hidden layer: an Ñ×D input weight matrix and Ñ
/// biases. Each neuron draws its D weights then its bias from one seeded
/// stream, so a network with fewer neurons is a prefix of a larger one.
pub fn init_hidden(config: &ElmConfig, feature_count: usize) -> Result<(DenseMatrix, Vec<f64>)> {
    config.validate()?;
    if feature_count == 0 {
        return Err(Error::Input("feature_count must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (lo, hi) = config.weight_range;
    let n = config.hidden_neurons;
    let mut weights = Vec::with_capacity(n * feature_count);
    let mut biases = Vec::with_capacity(n);
    for _ in 0..n {
        for _ in 0..feature_count {
            weights.push(rng.random_range(lo..hi));
        }
        biases.push(rng.random_range(BIAS_RANGE.0..BIAS_RANGE.1));
    }
    Ok((DenseMatrix::from_raw(n, feature_count, weights), biases))
}

/// `H[j][i] = g(wᵢ · xⱼ + bᵢ)`, an N×Ñ matrix.
pub fn hidden_output(
    x: &DenseMatrix,
    input_weights: &DenseMatrix,
    biases: &[f64],
    activation: Activation,
) -> Result<DenseMatrix> {
    if x.cols() != input_weights.cols() {
        return Err(Error::shape(
            "hidden_output",
            format!("{} features", input_weights.cols()),
            format!("{} features", x.cols()),
        ));
    }
    if biases.len() != input_weights.rows() {
        return Err(Error::shape(
            "hidden_output",
            format!("{} biases", input_weights.rows()),
            format!("{} biases", biases.len()),
        ));
    }
    let n_hidden = input_weights.rows();
    let mut h = vec![0.0; x.rows() * n_hidden];
    if n_hidden > 0 {
        h.par_chunks_mut(n_hidden).enumerate().for_each(|(j, out)| {
            let xj = x.row(j);
            for (i, o) in out.iter_mut().enumerate() {
                *o = activation.apply(linalg::dot(input_weights.row(i), xj) + biases[i]);
            }
        });
    }
    DenseMatrix::new(x.rows(), n_hidden, h)
}

/// A trained network. Immutable; safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct ElmModel {
    input_weights: DenseMatrix,
    biases: Vec<f64>,
    output_weights: DenseMatrix,
    threshold: f64,
    threshold_method: ThresholdMethod,
    normalization: Normalization,
    label_names: Vec<String>,
    config: ElmConfig,
}

impl ElmModel {
    /// Assembles a model from explicit parts, checking dimensional consistency.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        input_weights: DenseMatrix,
        biases: Vec<f64>,
        output_weights: DenseMatrix,
        threshold: f64,
        threshold_method: ThresholdMethod,
        normalization: Normalization,
        label_names: Vec<String>,
        config: ElmConfig,
    ) -> Result<Self> {
        let hidden = input_weights.rows();
        if biases.len() != hidden || output_weights.rows() != hidden {
            return Err(Error::Model(format!(
                "hidden size mismatch: {} weight rows, {} biases, {} output rows",
                hidden,
                biases.len(),
                output_weights.rows()
            )));
        }
        if normalization.len() != input_weights.cols() || normalization.scale.len() != normalization.shift.len() {
            return Err(Error::Model(format!(
                "normalization covers {} features, weights expect {}",
                normalization.len(),
                input_weights.cols()
            )));
        }
        if label_names.len() != output_weights.cols() {
            return Err(Error::Model(format!(
                "{} label names for {} outputs",
                label_names.len(),
                output_weights.cols()
            )));
        }
        let finite = biases
            .iter()
            .chain(&normalization.shift)
            .chain(&normalization.scale)
            .all(|v| v.is_finite())
            && threshold.is_finite();
        if !finite {
            return Err(Error::Model("non-finite parameter".into()));
        }
        Ok(Self {
            input_weights,
            biases,
            output_weights,
            threshold,
            threshold_method,
            normalization,
            label_names,
            config,
        })
    }

    pub fn input_weights(&self) -> &DenseMatrix {
        &self.input_weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn output_weights(&self) -> &DenseMatrix {
        &self.output_weights
    }

    pub fn activation(&self) -> Activation {
        self.config.activation
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn threshold_method(&self) -> ThresholdMethod {
        self.threshold_method
    }

    pub fn normalization(&self) -> &Normalization {
        &self.normalization
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn config(&self) -> &ElmConfig {
        &self.config
    }

    pub fn feature_count(&self) -> usize {
        self.input_weights.cols()
    }

    pub fn hidden_count(&self) -> usize {
        self.input_weights.rows()
    }

    pub fn label_count(&self) -> usize {
        self.output_weights.cols()
    }

    /// Copy of this model with a different decision threshold.
    pub fn with_threshold(&self, threshold: f64) -> Self {
        Self {
            threshold,
            threshold_method: ThresholdMethod::Fixed,
            ..self.clone()
        }
    }

    fn check_features(&self, x: &DenseMatrix) -> Result<()> {
        if x.cols() != self.feature_count() {
            return Err(Error::shape(
                "predict",
                format!("{} features", self.feature_count()),
                format!("{} features", x.cols()),
            ));
        }
        Ok(())
    }

    /// Hidden-layer output `H` for raw (unnormalized) inputs.
    pub fn hidden_layer(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_features(x)?;
        let xn = self.normalization.apply(x);
        hidden_output(&xn, &self.input_weights, &self.biases, self.config.activation)
    }

    /// Real-valued label scores `Hβ`, one row per sample.
    pub fn raw_predict(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        let h = self.hidden_layer(x)?;
        linalg::matmul(&h, &self.output_weights)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        codec::encode(self)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        codec::decode(bytes)
    }
}

/// Free-function form of [`ElmModel::raw_predict`].
pub fn raw_predict(model: &ElmModel, x: &DenseMatrix) -> Result<DenseMatrix> {
    model.raw_predict(x)
}

/// Side information produced while training.
#[derive(Debug, Clone)]
pub struct TrainSummary {
    /// Ridge actually added to the Gram matrix.
    pub ridge: f64,
    /// Calibration result; `None` when the threshold was fixed up front.
    pub threshold: Option<ThresholdReport>,
    /// `‖Hβ − Y‖_F / ‖Y‖_F` on the bipolar training targets.
    pub relative_residual: f64,
}

/// Trains a network on `dataset` in one batch least-squares solve.
pub fn train(dataset: &MultiLabelDataset, config: &ElmConfig) -> Result<ElmModel> {
    train_with_summary(dataset, config).map(|(m, _)| m)
}

pub fn train_with_summary(dataset: &MultiLabelDataset, config: &ElmConfig) -> Result<(ElmModel, TrainSummary)> {
    config.validate()?;
    let x = dataset.features();
    if x.rows() == 0 {
        return Err(Error::Input("cannot train on an empty dataset".into()));
    }
    if x.cols() == 0 {
        return Err(Error::Input("dataset has no features".into()));
    }
    if dataset.labels().cols() == 0 {
        return Err(Error::Input("dataset has no labels".into()));
    }

    let normalization = Normalization::fit(x);
    let xn = normalization.apply(x);
    let (input_weights, biases) = init_hidden(config, x.cols())?;
    let h = hidden_output(&xn, &input_weights, &biases, config.activation)?;
    let targets = multilabel::encode_bipolar(dataset.labels());
    let ridge = config.ridge.resolve(&h);
    let beta = linalg::least_squares(&h, &targets, ridge)?;
    if let Some(pos) = beta.as_slice().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            row: pos / beta.cols(),
            col: pos % beta.cols(),
            value: beta.as_slice()[pos],
        });
    }
    let raw = linalg::matmul(&h, &beta)?;
    let relative_residual = raw.sub(&targets)?.frobenius_norm() / targets.frobenius_norm();

    let (threshold, report) = match config.threshold {
        ThresholdMode::Fixed(t) => (ThresholdReport::fixed(t), None),
        ThresholdMode::Auto => match multilabel::calibrate_threshold(&raw, dataset.labels()) {
            Ok(r) => (r.clone(), Some(r)),
            Err(Error::Calibration(_)) => (ThresholdReport::fixed(0.0), None),
            Err(e) => return Err(e),
        },
    };

    let model = ElmModel::from_parts(
        input_weights,
        biases,
        beta,
        threshold.threshold,
        threshold.method,
        normalization,
        dataset.label_names().to_vec(),
        config.clone(),
    )?;
    Ok((
        model,
        TrainSummary {
            ridge,
            threshold: report,
            relative_residual,
        },
    ))
}
