//! Base classifiers producing class-1 probabilities: penalized logistic
//! regression, an RBF-kernel SVM with sigmoid score calibration, a
//! random forest, and Newton-step gradient-boosted trees.

pub mod boosting;
pub mod forest;
pub mod logistic;
pub mod platt;
pub mod svm;
pub mod tree;

pub use boosting::{predict_gbt_proba, train_gbt, GbtParams, GradientBoostingModel};
pub use forest::{predict_rf_proba, train_random_forest, ForestParams, RandomForestModel};
pub use logistic::{predict_logistic, train_logistic, LogisticModel, LogisticParams};
pub use platt::{apply_platt, fit_platt, PlattCalibrator};
pub use svm::{rbf_gamma_scale, svm_decision_value, train_svm, SvmModel, SvmParams};
pub use tree::{train_tree, GrowLimits, TreeNode};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("feature dimension mismatch: model expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("rows and labels differ in length ({rows} vs {labels})")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("label at row {row} is not 0 or 1")]
    LabelNotBinary { row: usize },
    #[error("perfect separation: coefficients diverge; a positive l2 penalty keeps them finite")]
    SeparationDetected,
    #[error("training data degenerate: {0}")]
    Degenerate(String),
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
}

pub(crate) fn check_training_inputs(x: &Matrix, y: &[u8]) -> Result<(), LearnerError> {
    if x.n_rows() != y.len() {
        return Err(LearnerError::LengthMismatch { rows: x.n_rows(), labels: y.len() });
    }
    if x.n_rows() == 0 {
        return Err(LearnerError::Degenerate("no training rows".into()));
    }
    if let Some(row) = y.iter().position(|&v| v > 1) {
        return Err(LearnerError::LabelNotBinary { row });
    }
    Ok(())
}

/// Clamp a probability into the open unit interval. Saturated sigmoids
/// otherwise round to exactly 0.0 or 1.0 in f64.
pub(crate) fn open_unit(p: f64) -> f64 {
    p.clamp(1e-12, 1.0 - 1e-12)
}

/// A trained base model together with whatever calibration it needs to
/// emit class-1 probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainedModel {
    Logistic(LogisticModel),
    SvmPlatt { model: SvmModel, calibrator: PlattCalibrator },
    RandomForest(RandomForestModel),
    GradientBoosting(GradientBoostingModel),
}

impl TrainedModel {
    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>, LearnerError> {
        match self {
            TrainedModel::Logistic(m) => predict_logistic(m, x),
            TrainedModel::SvmPlatt { model, calibrator } => {
                let margins = svm_decision_value(model, x)?;
                Ok(apply_platt(calibrator, &margins))
            }
            TrainedModel::RandomForest(m) => predict_rf_proba(m, x),
            TrainedModel::GradientBoosting(m) => predict_gbt_proba(m, x),
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            TrainedModel::Logistic(m) => m.coefficients.len(),
            TrainedModel::SvmPlatt { model, .. } => model.support_vectors.n_cols(),
            TrainedModel::RandomForest(m) => m.n_features,
            TrainedModel::GradientBoosting(m) => m.n_features,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            TrainedModel::Logistic(_) => "logistic",
            TrainedModel::SvmPlatt { .. } => "svm_platt",
            TrainedModel::RandomForest(_) => "random_forest",
            TrainedModel::GradientBoosting(_) => "gradient_boosting",
        }
    }
}
