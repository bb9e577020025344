//! RBF-kernel support vector machine trained by sequential minimal
//! optimization on the maximal violating pair, with a full error cache
//! and a gap-based stopping rule.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_training_inputs, LearnerError};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    /// Box constraint on the dual variables.
    pub c: f64,
    /// RBF width; `None` resolves to `1 / (p · mean feature variance)`.
    pub gamma: Option<f64>,
    /// Stop when the largest KKT violation gap falls below this.
    pub tol: f64,
    /// Budget in sweep-equivalents: at most `max_passes · n` pair steps
    /// before returning the best iterate.
    pub max_passes: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams { c: 1.0, gamma: None, tol: 1e-3, max_passes: 150 }
    }
}

/// Decision function `f(x) = Σ (α_i y_i) K(x_i, x) + bias` over the
/// retained support vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub support_vectors: Matrix,
    /// `α_i · y_i` per support vector.
    pub dual_coefficients: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub c: f64,
}

pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let mut d2 = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        d2 += d * d;
    }
    (-gamma * d2).exp()
}

/// Default RBF width `1 / (p · mean per-feature variance)`; falls back
/// to 1 when the data are constant.
pub fn rbf_gamma_scale(x: &Matrix) -> f64 {
    let n = x.n_rows();
    let p = x.n_cols();
    if n == 0 || p == 0 {
        return 1.0;
    }
    let mut var_sum = 0.0;
    for j in 0..p {
        let col = x.column(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        var_sum += col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    }
    let mean_var = var_sum / p as f64;
    if mean_var > 0.0 {
        1.0 / (p as f64 * mean_var)
    } else {
        1.0
    }
}

struct Smo<'a> {
    x: &'a Matrix,
    y: Vec<f64>,
    alpha: Vec<f64>,
    /// `f(x_i) - y_i`, maintained incrementally.
    errors: Vec<f64>,
    b: f64,
    c: f64,
    gamma: f64,
    tol: f64,
}

impl Smo<'_> {
    fn kernel_row(&self, i: usize) -> Vec<f64> {
        let xi = self.x.row(i);
        (0..self.x.n_rows())
            .into_par_iter()
            .map(|k| rbf_kernel(xi, self.x.row(k), self.gamma))
            .collect()
    }

    /// Maximal violating pair: the index that most wants its dual value
    /// pushed up and the one that most wants it pushed down, measured on
    /// `-E`. Returns (up, low, gap).
    fn select_pair(&self) -> Option<(usize, usize, f64)> {
        let mut up: Option<(usize, f64)> = None;
        let mut low: Option<(usize, f64)> = None;
        for t in 0..self.x.n_rows() {
            let a = self.alpha[t];
            let v = -self.errors[t];
            let in_up = (self.y[t] > 0.0 && a < self.c) || (self.y[t] < 0.0 && a > 0.0);
            let in_low = (self.y[t] < 0.0 && a < self.c) || (self.y[t] > 0.0 && a > 0.0);
            if in_up && up.is_none_or(|(_, best)| v > best) {
                up = Some((t, v));
            }
            if in_low && low.is_none_or(|(_, best)| v < best) {
                low = Some((t, v));
            }
        }
        let ((i, m_up), (j, m_low)) = (up?, low?);
        Some((i, j, m_up - m_low))
    }

    /// Joint optimization of one pair. Returns false only when the pair
    /// cannot move (degenerate geometry).
    fn take_step(&mut self, i1: usize, i2: usize) -> bool {
        if i1 == i2 {
            return false;
        }
        let (y1, y2) = (self.y[i1], self.y[i2]);
        let (a1o, a2o) = (self.alpha[i1], self.alpha[i2]);
        let (e1, e2) = (self.errors[i1], self.errors[i2]);
        let s = y1 * y2;

        let (low, high) = if s < 0.0 {
            ((a2o - a1o).max(0.0), (self.c + a2o - a1o).min(self.c))
        } else {
            ((a1o + a2o - self.c).max(0.0), (a1o + a2o).min(self.c))
        };
        if low >= high {
            return false;
        }

        let k11 = 1.0; // RBF at zero distance
        let k22 = 1.0;
        let k12 = rbf_kernel(self.x.row(i1), self.x.row(i2), self.gamma);
        let eta = k11 + k22 - 2.0 * k12;

        let mut a2 = if eta > 0.0 {
            (a2o + y2 * (e1 - e2) / eta).clamp(low, high)
        } else {
            // identical points: the objective is linear along the
            // constraint segment, so one endpoint is optimal
            let f1 = y1 * (e1 + self.b) - a1o * k11 - s * a2o * k12;
            let f2 = y2 * (e2 + self.b) - s * a1o * k12 - a2o * k22;
            let l1 = a1o + s * (a2o - low);
            let h1 = a1o + s * (a2o - high);
            let lobj = l1 * f1 + low * f2
                + 0.5 * l1 * l1 * k11
                + 0.5 * low * low * k22
                + s * low * l1 * k12;
            let hobj = h1 * f1 + high * f2
                + 0.5 * h1 * h1 * k11
                + 0.5 * high * high * k22
                + s * high * h1 * k12;
            if lobj < hobj - 1e-12 {
                low
            } else if lobj > hobj + 1e-12 {
                high
            } else {
                return false;
            }
        };
        // snap to exact bounds so set membership stays strict; an alpha
        // parked 1e-16 inside a bound would otherwise get selected with
        // no representable room to move
        if a2 < 1e-12 {
            a2 = 0.0;
        } else if a2 > self.c - 1e-12 {
            a2 = self.c;
        }
        let mut a1 = a1o + s * (a2o - a2);
        if a1 < 1e-12 {
            a1 = 0.0;
        } else if a1 > self.c - 1e-12 {
            a1 = self.c;
        }
        if a2 == a2o && a1 == a1o {
            return false;
        }

        let d1 = y1 * (a1 - a1o);
        let d2 = y2 * (a2 - a2o);
        let b1 = self.b - e1 - d1 * k11 - d2 * k12;
        let b2 = self.b - e2 - d1 * k12 - d2 * k22;
        let new_b = if a1 > 0.0 && a1 < self.c {
            b1
        } else if a2 > 0.0 && a2 < self.c {
            b2
        } else {
            (b1 + b2) / 2.0
        };
        let delta_b = new_b - self.b;

        let row1 = self.kernel_row(i1);
        let row2 = self.kernel_row(i2);
        self.errors
            .par_iter_mut()
            .enumerate()
            .for_each(|(k, e)| *e += d1 * row1[k] + d2 * row2[k] + delta_b);

        self.alpha[i1] = a1;
        self.alpha[i2] = a2;
        self.b = new_b;
        true
    }

    /// Returns true when the violation gap fell below `tol` within the
    /// step budget.
    fn solve(&mut self, max_steps: usize) -> bool {
        for _ in 0..max_steps {
            let Some((i, j, gap)) = self.select_pair() else { return true };
            if gap <= self.tol {
                self.recenter_bias();
                return true;
            }
            if !self.take_step(i, j) {
                log::warn!("svm pair step stalled at violation gap {gap:.3e}");
                self.recenter_bias();
                return false;
            }
        }
        self.recenter_bias();
        false
    }

    /// Place the bias midway between the two active bound sets so the
    /// residual KKT slack is split evenly.
    fn recenter_bias(&mut self) {
        let Some((i, j, _)) = self.select_pair() else { return };
        let shift = ((-self.errors[i]) + (-self.errors[j])) / 2.0;
        if shift != 0.0 && shift.is_finite() {
            self.b += shift;
            for e in self.errors.iter_mut() {
                *e += shift;
            }
        }
    }
}

/// Labels 0/1 are remapped to -1/+1 internally. Exhausting the step
/// budget logs a warning and returns the best iterate reached.
pub fn train_svm(x: &Matrix, y: &[u8], params: &SvmParams) -> Result<SvmModel, LearnerError> {
    check_training_inputs(x, y)?;
    if params.c <= 0.0 || params.tol <= 0.0 || params.max_passes == 0 {
        return Err(LearnerError::InvalidHyperparameter(
            "svm needs c > 0, tol > 0 and at least one pass".into(),
        ));
    }
    let n_pos = y.iter().filter(|&&v| v == 1).count();
    if n_pos == 0 || n_pos == y.len() {
        return Err(LearnerError::Degenerate("svm training needs both classes".into()));
    }
    let gamma = params.gamma.unwrap_or_else(|| rbf_gamma_scale(x));
    if gamma <= 0.0 {
        return Err(LearnerError::InvalidHyperparameter("gamma must be positive".into()));
    }

    let yf: Vec<f64> = y.iter().map(|&v| if v == 1 { 1.0 } else { -1.0 }).collect();
    let n = x.n_rows();
    let mut smo = Smo {
        x,
        errors: yf.iter().map(|&v| -v).collect(),
        y: yf,
        alpha: vec![0.0; n],
        b: 0.0,
        c: params.c,
        gamma,
        tol: params.tol,
    };

    if !smo.solve(params.max_passes.saturating_mul(n)) {
        log::warn!("svm stopped before reaching tolerance; returning best iterate");
    }

    let keep: Vec<usize> = (0..n).filter(|&i| smo.alpha[i] > 1e-12).collect();
    let dual_coefficients: Vec<f64> = keep.iter().map(|&i| smo.alpha[i] * smo.y[i]).collect();
    let support_vectors = if keep.is_empty() {
        Matrix::zeros(0, x.n_cols())
    } else {
        x.select_rows(&keep)
    };
    Ok(SvmModel { support_vectors, dual_coefficients, bias: smo.b, gamma, c: params.c })
}

pub fn svm_decision_value(m: &SvmModel, x: &Matrix) -> Result<Vec<f64>, LearnerError> {
    if x.n_cols() != m.support_vectors.n_cols() {
        return Err(LearnerError::DimensionMismatch {
            expected: m.support_vectors.n_cols(),
            got: x.n_cols(),
        });
    }
    Ok((0..x.n_rows())
        .into_par_iter()
        .map(|i| {
            let row = x.row(i);
            let mut f = m.bias;
            for (sv, coeff) in m.support_vectors.rows_iter().zip(&m.dual_coefficients) {
                f += coeff * rbf_kernel(sv, row, m.gamma);
            }
            f
        })
        .collect())
}
