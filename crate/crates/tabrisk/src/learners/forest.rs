//! Bagged classification trees with per-node feature subsampling.
//! Probability output is the mean leaf class-1 frequency across trees;
//! thresholding that mean at 0.5 recovers the hard majority vote.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow_classification_tree, GrowLimits, TreeNode};
use super::{check_training_inputs, LearnerError};
use crate::math::seeded_stream;
use crate::matrix::Matrix;
use rand::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub trees: usize,
    /// Features tried per node; `None` means `floor(sqrt(p))`.
    pub mtry: Option<usize>,
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
    /// Draw each tree's rows with replacement. Disable to fit every tree
    /// on the full data (then a one-tree forest is exactly a single tree).
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            trees: 300,
            mtry: None,
            min_leaf: 2,
            max_depth: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForestModel {
    pub trees: Vec<TreeNode>,
    pub n_features: usize,
    pub mtry: usize,
    pub seed: u64,
}

/// Tree `t` draws its bootstrap rows and per-node feature subsets from
/// the RNG stream `(seed, t)`, so the forest is identical across thread
/// counts and schedules.
pub fn train_random_forest(
    x: &Matrix,
    y: &[u8],
    params: &ForestParams,
) -> Result<RandomForestModel, LearnerError> {
    check_training_inputs(x, y)?;
    if params.trees == 0 {
        return Err(LearnerError::InvalidHyperparameter("forest needs at least one tree".into()));
    }
    if params.min_leaf == 0 {
        return Err(LearnerError::InvalidHyperparameter("min_leaf must be at least 1".into()));
    }
    let p = x.n_cols();
    let mtry = params
        .mtry
        .unwrap_or_else(|| (p as f64).sqrt().floor() as usize)
        .clamp(1, p.max(1));
    let limits = GrowLimits { max_depth: params.max_depth, min_leaf: params.min_leaf };
    let n = x.n_rows();

    let trees: Vec<TreeNode> = (0..params.trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seeded_stream(params.seed, t as u64);
            let rows: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            grow_classification_tree(x, y, &rows, &limits, mtry, &mut rng)
        })
        .collect();

    Ok(RandomForestModel { trees, n_features: p, mtry, seed: params.seed })
}

pub fn predict_rf_proba(m: &RandomForestModel, x: &Matrix) -> Result<Vec<f64>, LearnerError> {
    if x.n_cols() != m.n_features {
        return Err(LearnerError::DimensionMismatch { expected: m.n_features, got: x.n_cols() });
    }
    let t = m.trees.len() as f64;
    Ok((0..x.n_rows())
        .into_par_iter()
        .map(|i| {
            let row = x.row(i);
            m.trees.iter().map(|tree| tree.value_at(row)).sum::<f64>() / t
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::tree::train_tree;
    use crate::metrics::{auroc, ScoredPredictions};
    use crate::synth::two_gaussians;

    fn toy() -> (Matrix, Vec<u8>) {
        let mut rng = seeded_stream(71, 0);
        let n = 400;
        let x = Matrix::from_vec((0..n * 3).map(|_| rng.random()).collect(), n, 3);
        let y: Vec<u8> =
            x.rows_iter().map(|r| u8::from(r[0] + 0.2 * rng.random::<f64>() > 0.6)).collect();
        (x, y)
    }

    #[test]
    fn single_unbagged_tree_equals_plain_tree() {
        let (x, y) = toy();
        let params = ForestParams {
            trees: 1,
            mtry: Some(3),
            bootstrap: false,
            min_leaf: 2,
            ..ForestParams::default()
        };
        let forest = train_random_forest(&x, &y, &params).unwrap();
        let single = train_tree(&x, &y, &GrowLimits { max_depth: None, min_leaf: 2 });
        assert_eq!(forest.trees[0], single);
        let pf = predict_rf_proba(&forest, &x).unwrap();
        let ps: Vec<f64> = x.rows_iter().map(|r| single.value_at(r)).collect();
        assert_eq!(pf, ps);
    }

    #[test]
    fn same_seed_reproduces_identical_forest() {
        let (x, y) = toy();
        let params = ForestParams { trees: 12, seed: 9, ..ForestParams::default() };
        let a = train_random_forest(&x, &y, &params).unwrap();
        let b = train_random_forest(&x, &y, &params).unwrap();
        assert_eq!(a, b);
        let c = train_random_forest(&x, &y, &ForestParams { seed: 10, ..params }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn forest_is_independent_of_thread_count() {
        let (x, y) = toy();
        let params = ForestParams { trees: 8, seed: 4, ..ForestParams::default() };
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = pool1.install(|| train_random_forest(&x, &y, &params).unwrap());
        let b = pool4.install(|| train_random_forest(&x, &y, &params).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn probabilities_stay_in_unit_interval() {
        let (x, y) = toy();
        let m = train_random_forest(&x, &y, &ForestParams { trees: 20, ..ForestParams::default() })
            .unwrap();
        let p = predict_rf_proba(&m, &x).unwrap();
        assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn approaches_bayes_discrimination_on_gaussian_classes() {
        let (x, y) = two_gaussians(2000, 4, 0.5, 91);
        let (xt, yt) = two_gaussians(1200, 4, 0.5, 92);
        let m = train_random_forest(
            &x,
            &y,
            &ForestParams { trees: 120, ..ForestParams::default() },
        )
        .unwrap();
        let p = predict_rf_proba(&m, &xt).unwrap();
        let sp = ScoredPredictions::new(p, yt, "holdout").unwrap();
        let auc = auroc(&sp).unwrap();
        let bayes = crate::math::normal_cdf(0.5 * 2.0 / std::f64::consts::SQRT_2);
        assert!((auc - bayes).abs() < 0.05, "auc {auc} vs bayes {bayes}");
    }

    #[test]
    fn rejects_zero_trees() {
        let (x, y) = toy();
        let r = train_random_forest(&x, &y, &ForestParams { trees: 0, ..ForestParams::default() });
        assert!(matches!(r, Err(LearnerError::InvalidHyperparameter(_))));
    }
}
