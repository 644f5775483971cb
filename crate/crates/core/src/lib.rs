//! Least-squares preprocessing for EEG seizure detection.
//!
//! The pipeline approximates each EEG segment by an amplitude-modulated
//! sinusoid over a frequency/phase grid, keeps the best-fitting grid point
//! and its coefficients as a compact feature vector, and classifies the
//! feature vectors into seizure and non-seizure segments.
//!
//! Modules follow the pipeline order:
//!
//! - [`signal_model`]: amplitude functions (polynomial / truncated-power
//!   spline) and design-matrix assembly for the four wave models.
//! - [`lls_solver`]: normal-equation, orthogonal, and SVD minimum-norm
//!   least-squares solvers.
//! - [`feature_extraction`]: the (ω, τ) grid search and feature CSV format.
//! - [`data_ingest`]: Bonn-format loading, balanced experiments, splits,
//!   and synthetic data.
//! - [`classifiers`]: k-NN, logistic regression, OneR, decision tree.
//! - [`evaluation`]: confusion matrices, derived metrics, result tables.

pub mod classifiers;
pub mod data_ingest;
pub mod error;
pub mod evaluation;
pub mod feature_extraction;
pub mod label;
pub mod lls_solver;
pub mod signal_model;

pub use error::{Error, Result};
pub use label::ClassLabel;
