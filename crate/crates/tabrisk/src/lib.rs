//! Hybrid soft-voting classifiers for binary tabular risk prediction.
//!
//! `tabrisk` trains two hybrid ensembles over four from-scratch base
//! learners (gradient boosting + random forest, and RBF-SVM + logistic
//! regression) under a leakage-safe preprocessing pipeline that is fit on
//! the training split once, frozen, and applied verbatim to held-out and
//! external cohorts. Evaluation covers threshold-independent discrimination
//! (ROC/PR areas), calibration (Brier, slope/intercept, reliability bins),
//! bootstrap confidence intervals, and paired significance tests (DeLong,
//! McNemar).
//!
//! The crate is organized as a library with one runnable example per major
//! capability (see `examples/`) plus a thin `tabrisk` binary that drives the
//! full experiment protocol: `prepare`, `train`, `evaluate`,
//! `external-validate`, `report`.
//!
//! # Quick tour
//!
//! ```
//! use tabrisk::metrics::{auroc, ScoredPredictions};
//!
//! let sp = ScoredPredictions::new(vec![0.1, 0.4, 0.35, 0.8], vec![0, 0, 1, 1], "demo").unwrap();
//! assert_eq!(auroc(&sp).unwrap(), 0.75);
//! ```
//!
//! Where to look:
//!
//! - [`tabular`]: dataset schema, CSV ingestion, seeded stratified splits
//! - [`preprocess`]: encode/impute/scale, schema harmonization, the frozen pipeline
//! - [`smote`]: synthetic minority oversampling for training folds
//! - [`learners`]: logistic regression, SMO-trained RBF-SVM, random forest,
//!   second-order gradient boosting, Platt calibration
//! - [`ensemble`]: weighted soft voting over calibrated members
//! - [`metrics`]: ROC/PR curves and areas, Brier, calibration fit, reliability bins
//! - [`stats`]: percentile bootstrap CIs, DeLong and McNemar paired tests
//! - [`runner`]: experiment orchestration, bundles, reports, SVG plots

pub mod ensemble;
pub mod learners;
pub mod math;
pub mod matrix;
pub mod metrics;
pub mod preprocess;
pub mod runner;
pub mod smote;
pub mod stats;
pub mod synth;
pub mod tabular;

pub use matrix::Matrix;
