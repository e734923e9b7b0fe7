//! Multi-label classification with extreme learning machines.
//!
//! A random, frozen hidden layer projects the (normalized) features; the
//! output weights are fitted in one least-squares solve against bipolar
//! (±1) label targets; a single calibrated threshold turns the real-valued
//! outputs back into label sets. Around the classifier sit the usual
//! evaluation pieces: example-based metrics, label cardinality/density,
//! ARFF and delimited loaders, and seeded k-fold cross-validation.
//!
//! ```
//! use mlelm_core::{cv, elm::ElmConfig, synthetic};
//!
//! let data = synthetic::linear_threshold(80, 5, 3, 0.0, 0.05, 7);
//! let report = cv::cross_validate(&data, &ElmConfig::new(60), 5, 1).unwrap();
//! assert!(report.mean.hamming_loss < 0.5);
//! ```

pub mod cv;
pub mod data;
pub mod elm;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod multilabel;
pub mod synthetic;

pub use cv::CvReport;
pub use data::MultiLabelDataset;
pub use elm::{Activation, ElmConfig, ElmModel};
pub use error::{Error, Result};
pub use linalg::DenseMatrix;
pub use metrics::{DatasetStats, MetricsReport};
pub use multilabel::{LabelMatrix, ThresholdReport};
