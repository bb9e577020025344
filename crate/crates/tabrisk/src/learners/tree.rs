//! Exact greedy binary decision trees: the CART primitive shared by the
//! forest (Gini impurity) and the boosting rounds (second-order gain).
//!
//! Candidate thresholds are midpoints between consecutive sorted unique
//! feature values; ties in gain break to the lowest feature index, then
//! the lowest threshold.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::math::KahanSum;
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Split { feature: usize, threshold: f64, left: Box<TreeNode>, right: Box<TreeNode> },
    Leaf { value: f64 },
}

impl TreeNode {
    /// Route a feature row to its leaf value (`x[feature] <= threshold`
    /// goes left).
    pub fn value_at(&self, row: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split { feature, threshold, left, right } => {
                    node = if row[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowLimits {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

impl Default for GrowLimits {
    fn default() -> Self {
        GrowLimits { max_depth: None, min_leaf: 2 }
    }
}

/// Midpoint that is guaranteed to route `a` left and `b` right even when
/// the two are adjacent floats.
fn split_point(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m < b {
        m
    } else {
        a
    }
}

fn gini(pos: usize, n: usize) -> f64 {
    let p1 = pos as f64 / n as f64;
    1.0 - p1 * p1 - (1.0 - p1) * (1.0 - p1)
}

/// Best Gini split of `rows` on one feature: returns (gain, threshold).
fn gini_split_for_feature(
    x: &Matrix,
    labels: &[u8],
    rows: &[usize],
    feature: usize,
    min_leaf: usize,
) -> Option<(f64, f64)> {
    let mut vals: Vec<(f64, u8)> =
        rows.iter().map(|&r| (x.get(r, feature), labels[r])).collect();
    vals.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let n = vals.len();
    let total_pos = vals.iter().filter(|(_, y)| *y == 1).count();
    let parent = gini(total_pos, n);

    let mut best: Option<(f64, f64)> = None;
    let (mut left_n, mut left_pos) = (0usize, 0usize);
    for i in 0..n - 1 {
        left_n += 1;
        left_pos += vals[i].1 as usize;
        if vals[i].0 == vals[i + 1].0 {
            continue;
        }
        let right_n = n - left_n;
        if left_n < min_leaf || right_n < min_leaf {
            continue;
        }
        let weighted = left_n as f64 / n as f64 * gini(left_pos, left_n)
            + right_n as f64 / n as f64 * gini(total_pos - left_pos, right_n);
        let gain = parent - weighted;
        if best.is_none_or(|(g, _)| gain > g) {
            best = Some((gain, split_point(vals[i].0, vals[i + 1].0)));
        }
    }
    best
}

/// Best second-order split of `rows` on one feature.
fn newton_split_for_feature(
    x: &Matrix,
    gradients: &[f64],
    hessians: &[f64],
    rows: &[usize],
    feature: usize,
    min_leaf: usize,
    lambda: f64,
    gamma: f64,
) -> Option<(f64, f64)> {
    let mut vals: Vec<(f64, f64, f64)> =
        rows.iter().map(|&r| (x.get(r, feature), gradients[r], hessians[r])).collect();
    vals.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let n = vals.len();
    let (mut gt, mut ht) = (KahanSum::default(), KahanSum::default());
    for &(_, g, h) in &vals {
        gt.add(g);
        ht.add(h);
    }
    let (total_g, total_h) = (gt.value(), ht.value());

    let mut best: Option<(f64, f64)> = None;
    let (mut gl, mut hl) = (KahanSum::default(), KahanSum::default());
    for i in 0..n - 1 {
        gl.add(vals[i].1);
        hl.add(vals[i].2);
        if vals[i].0 == vals[i + 1].0 {
            continue;
        }
        let left_n = i + 1;
        let right_n = n - left_n;
        if left_n < min_leaf || right_n < min_leaf {
            continue;
        }
        let (g_left, h_left) = (gl.value(), hl.value());
        let (g_right, h_right) = (total_g - g_left, total_h - h_left);
        let gain = 0.5
            * (g_left * g_left / (h_left + lambda) + g_right * g_right / (h_right + lambda)
                - total_g * total_g / (total_h + lambda))
            - gamma;
        if best.is_none_or(|(g, _)| gain > g) {
            best = Some((gain, split_point(vals[i].0, vals[i + 1].0)));
        }
    }
    best
}

/// Scan `features` (must be ascending for the tie-break) and keep the
/// first-best split. Parallel when the node is large; the ordered
/// collect keeps the result identical to a sequential scan.
fn best_split<F>(features: &[usize], rows_len: usize, per_feature: F) -> Option<(usize, f64, f64)>
where
    F: Fn(usize) -> Option<(f64, f64)> + Sync,
{
    let candidates: Vec<Option<(f64, f64)>> = if features.len() * rows_len >= 8192 {
        features.par_iter().map(|&f| per_feature(f)).collect()
    } else {
        features.iter().map(|&f| per_feature(f)).collect()
    };
    let mut best: Option<(usize, f64, f64)> = None;
    for (&f, cand) in features.iter().zip(&candidates) {
        if let Some((gain, thr)) = cand {
            if best.is_none_or(|(_, g, _)| *gain > g) {
                best = Some((f, *gain, *thr));
            }
        }
    }
    best
}

fn partition(x: &Matrix, rows: &[usize], feature: usize, threshold: f64) -> (Vec<usize>, Vec<usize>) {
    let mut left = Vec::new();
    let mut right = Vec::new();
    for &r in rows {
        if x.get(r, feature) <= threshold {
            left.push(r);
        } else {
            right.push(r);
        }
    }
    (left, right)
}

/// Grow a classification tree over `rows`, sampling `mtry` candidate
/// features per node from `rng` (all features when `mtry >= n_cols`,
/// consuming no randomness). Leaves hold the class-1 frequency.
pub fn grow_classification_tree(
    x: &Matrix,
    labels: &[u8],
    rows: &[usize],
    limits: &GrowLimits,
    mtry: usize,
    rng: &mut ChaCha8Rng,
) -> TreeNode {
    grow_gini(x, labels, rows, limits, mtry.max(1), rng, 0)
}

fn grow_gini(
    x: &Matrix,
    labels: &[u8],
    rows: &[usize],
    limits: &GrowLimits,
    mtry: usize,
    rng: &mut ChaCha8Rng,
    depth: usize,
) -> TreeNode {
    let n = rows.len();
    let pos = rows.iter().filter(|&&r| labels[r] == 1).count();
    let leaf = TreeNode::Leaf { value: pos as f64 / n as f64 };
    if pos == 0 || pos == n || n < 2 * limits.min_leaf {
        return leaf;
    }
    if let Some(d) = limits.max_depth {
        if depth >= d {
            return leaf;
        }
    }

    let p = x.n_cols();
    let features: Vec<usize> = if mtry >= p {
        (0..p).collect()
    } else {
        let mut chosen = rand::seq::index::sample(rng, p, mtry).into_vec();
        chosen.sort_unstable();
        chosen
    };

    let split = best_split(&features, n, |f| {
        gini_split_for_feature(x, labels, rows, f, limits.min_leaf)
    });
    let Some((feature, gain, threshold)) = split else { return leaf };
    if gain <= 0.0 {
        return leaf;
    }
    let (left_rows, right_rows) = partition(x, rows, feature, threshold);
    if left_rows.is_empty() || right_rows.is_empty() {
        return leaf;
    }
    TreeNode::Split {
        feature,
        threshold,
        left: Box::new(grow_gini(x, labels, &left_rows, limits, mtry, rng, depth + 1)),
        right: Box::new(grow_gini(x, labels, &right_rows, limits, mtry, rng, depth + 1)),
    }
}

/// Grow a regression tree on per-row gradient/hessian pairs. Leaves hold
/// the Newton weight `-G/(H+lambda)`; splits need positive gain
/// `0.5·[G_L²/(H_L+λ) + G_R²/(H_R+λ) - G²/(H+λ)] - γ`.
pub fn grow_newton_tree(
    x: &Matrix,
    gradients: &[f64],
    hessians: &[f64],
    rows: &[usize],
    limits: &GrowLimits,
    lambda: f64,
    gamma: f64,
) -> TreeNode {
    let n = rows.len();
    let (mut gt, mut ht) = (KahanSum::default(), KahanSum::default());
    for &r in rows {
        gt.add(gradients[r]);
        ht.add(hessians[r]);
    }
    let leaf = TreeNode::Leaf { value: -gt.value() / (ht.value() + lambda) };
    if n < 2 * limits.min_leaf.max(1) {
        return leaf;
    }
    if limits.max_depth == Some(0) {
        return leaf;
    }

    let features: Vec<usize> = (0..x.n_cols()).collect();
    let split = best_split(&features, n, |f| {
        newton_split_for_feature(x, gradients, hessians, rows, f, limits.min_leaf.max(1), lambda, gamma)
    });
    let Some((feature, gain, threshold)) = split else { return leaf };
    if gain <= 0.0 {
        return leaf;
    }
    let (left_rows, right_rows) = partition(x, rows, feature, threshold);
    if left_rows.is_empty() || right_rows.is_empty() {
        return leaf;
    }
    let child_limits = GrowLimits {
        max_depth: limits.max_depth.map(|d| d - 1),
        min_leaf: limits.min_leaf,
    };
    TreeNode::Split {
        feature,
        threshold,
        left: Box::new(grow_newton_tree(x, gradients, hessians, &left_rows, &child_limits, lambda, gamma)),
        right: Box::new(grow_newton_tree(x, gradients, hessians, &right_rows, &child_limits, lambda, gamma)),
    }
}

/// Plain single classification tree on all features.
pub fn train_tree(x: &Matrix, labels: &[u8], limits: &GrowLimits) -> TreeNode {
    let rows: Vec<usize> = (0..x.n_rows()).collect();
    let mut rng = crate::math::seeded_stream(0, 0);
    grow_classification_tree(x, labels, &rows, limits, x.n_cols(), &mut rng)
}
