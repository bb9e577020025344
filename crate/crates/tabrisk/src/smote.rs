//! Minority oversampling on numeric training folds: each synthetic row is
//! a convex combination of a minority row and one of its k nearest
//! minority neighbors.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math::seeded_stream;
use crate::matrix::Matrix;

#[derive(Debug, Error)]
pub enum SmoteError {
    #[error("minority class has {count} rows; at least 2 are required")]
    MinorityTooSmall { count: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoteConfig {
    pub k_neighbors: usize,
    /// Desired minority/majority count ratio after resampling.
    pub target_ratio: f64,
    pub seed: u64,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        SmoteConfig { k_neighbors: 5, target_ratio: 1.0, seed: 0 }
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Indices (into `rows`) of the k nearest neighbors of every row, self
/// excluded. Distance ties break on the lower row index, so results do
/// not depend on traversal order.
fn knn_among(rows: &[&[f64]], k: usize) -> Vec<Vec<usize>> {
    rows.par_iter()
        .enumerate()
        .map(|(i, a)| {
            let mut dists: Vec<(f64, usize)> = rows
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(j, b)| (squared_distance(a, b), j))
                .collect();
            dists.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap().then(x.1.cmp(&y.1)));
            dists.truncate(k);
            dists.into_iter().map(|(_, j)| j).collect()
        })
        .collect()
}

/// Raises the minority count to `⌈target_ratio · majority⌉` by appending
/// synthetic rows `s = x + u·(x_nn − x)` with one uniform `u ∈ [0,1)` per
/// row. Original rows and labels are preserved verbatim, in order.
///
/// When `k_neighbors` reaches the minority count it is lowered to
/// minority − 1 with a warning. Synthetic-row randomness comes from
/// per-row streams of `(seed, row index)`, so output is identical across
/// serial and parallel runs.
pub fn smote_oversample(
    x: &Matrix,
    y: &[u8],
    cfg: &SmoteConfig,
) -> Result<(Matrix, Vec<u8>), SmoteError> {
    assert_eq!(x.n_rows(), y.len(), "feature rows and labels must align");
    if cfg.k_neighbors < 1 {
        return Err(SmoteError::InvalidConfig("k_neighbors must be ≥ 1".into()));
    }
    if !(cfg.target_ratio > 0.0 && cfg.target_ratio <= 1.0) {
        return Err(SmoteError::InvalidConfig(format!(
            "target_ratio must be in (0, 1], got {}",
            cfg.target_ratio
        )));
    }

    let count1 = y.iter().filter(|&&v| v == 1).count();
    let count0 = y.len() - count1;
    let (minority_label, n_min, n_maj) =
        if count1 <= count0 { (1u8, count1, count0) } else { (0u8, count0, count1) };

    let target = (cfg.target_ratio * n_maj as f64).ceil() as usize;
    if target <= n_min {
        return Ok((x.clone(), y.to_vec()));
    }
    if n_min < 2 {
        return Err(SmoteError::MinorityTooSmall { count: n_min });
    }

    let mut k = cfg.k_neighbors;
    if k >= n_min {
        k = n_min - 1;
        log::warn!(
            "k_neighbors {} ≥ minority count {n_min}; lowered to {k}",
            cfg.k_neighbors
        );
    }

    let minority_idx: Vec<usize> =
        (0..y.len()).filter(|&i| y[i] == minority_label).collect();
    let minority_rows: Vec<&[f64]> = minority_idx.iter().map(|&i| x.row(i)).collect();
    let neighbors = knn_among(&minority_rows, k);

    let n_new = target - n_min;
    let synthetic: Vec<Vec<f64>> = (0..n_new)
        .into_par_iter()
        .map(|s| {
            let mut rng = seeded_stream(cfg.seed, s as u64);
            let base = s % n_min;
            let nn = neighbors[base][rng.random_range(0..k)];
            let u: f64 = rng.random();
            minority_rows[base]
                .iter()
                .zip(minority_rows[nn])
                .map(|(a, b)| a + u * (b - a))
                .collect()
        })
        .collect();

    let mut out_x = x.clone();
    let mut out_y = y.to_vec();
    for row in &synthetic {
        out_x.push_row(row);
        out_y.push(minority_label);
    }
    Ok((out_x, out_y))
}
