//! Gradient-boosted trees on logistic loss. Each round fits a
//! second-order regression tree to per-row gradients `p - y` and
//! hessians `p·(1-p)`, then advances every margin by the learning rate
//! times the round's leaf weight.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow_newton_tree, GrowLimits, TreeNode};
use super::{check_training_inputs, open_unit, LearnerError};
use crate::math::{logit, sigmoid};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtParams {
    pub rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
    /// Fixed cost per additional leaf; splits must clear it.
    pub gamma: f64,
    pub min_leaf: usize,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams {
            rounds: 300,
            learning_rate: 0.1,
            max_depth: 6,
            lambda: 1.0,
            gamma: 0.0,
            min_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoostingModel {
    pub trees: Vec<TreeNode>,
    /// Log-odds of the training prevalence; round 0 starts here.
    pub base_score: f64,
    pub learning_rate: f64,
    pub lambda: f64,
    pub n_features: usize,
}

pub fn train_gbt(
    x: &Matrix,
    y: &[u8],
    params: &GbtParams,
) -> Result<GradientBoostingModel, LearnerError> {
    check_training_inputs(x, y)?;
    if params.rounds == 0 || params.learning_rate <= 0.0 {
        return Err(LearnerError::InvalidHyperparameter(
            "boosting needs rounds >= 1 and a positive learning rate".into(),
        ));
    }
    if params.lambda < 0.0 || params.gamma < 0.0 {
        return Err(LearnerError::InvalidHyperparameter(
            "leaf penalties must be non-negative".into(),
        ));
    }

    let n = x.n_rows();
    let prevalence = y.iter().map(|&v| v as f64).sum::<f64>() / n as f64;
    let base_score = logit(prevalence.clamp(1e-6, 1.0 - 1e-6));
    let limits = GrowLimits { max_depth: Some(params.max_depth), min_leaf: params.min_leaf };
    let rows: Vec<usize> = (0..n).collect();

    let mut margins = vec![base_score; n];
    let mut gradients = vec![0.0f64; n];
    let mut hessians = vec![0.0f64; n];
    let mut trees = Vec::with_capacity(params.rounds);

    for _ in 0..params.rounds {
        gradients
            .par_iter_mut()
            .zip(hessians.par_iter_mut())
            .zip(margins.par_iter())
            .zip(y.par_iter())
            .for_each(|(((g, h), &m), &yi)| {
                let p = sigmoid(m);
                *g = p - yi as f64;
                *h = p * (1.0 - p);
            });

        let tree =
            grow_newton_tree(x, &gradients, &hessians, &rows, &limits, params.lambda, params.gamma);
        margins
            .par_iter_mut()
            .enumerate()
            .for_each(|(i, m)| *m += params.learning_rate * tree.value_at(x.row(i)));
        trees.push(tree);
    }

    Ok(GradientBoostingModel {
        trees,
        base_score,
        learning_rate: params.learning_rate,
        lambda: params.lambda,
        n_features: x.n_cols(),
    })
}

pub fn predict_gbt_proba(m: &GradientBoostingModel, x: &Matrix) -> Result<Vec<f64>, LearnerError> {
    if x.n_cols() != m.n_features {
        return Err(LearnerError::DimensionMismatch { expected: m.n_features, got: x.n_cols() });
    }
    Ok((0..x.n_rows())
        .into_par_iter()
        .map(|i| {
            let row = x.row(i);
            let margin = m.base_score
                + m.learning_rate * m.trees.iter().map(|t| t.value_at(row)).sum::<f64>();
            open_unit(sigmoid(margin))
        })
        .collect())
}
