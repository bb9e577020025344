//! L2-penalized logistic regression fit by damped Newton iterations
//! (iteratively reweighted least squares).

use serde::{Deserialize, Serialize};

use super::{check_training_inputs, open_unit, LearnerError};
use crate::math::{sigmoid, solve_spd, KahanSum};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub l2_penalty: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams { l2_penalty: 1e-4, tol: 1e-8, max_iter: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub l2_penalty: f64,
}

/// Mean negative log-likelihood plus (λ/2)·‖slopes‖². The per-sample
/// mean keeps `tol` meaningful at any sample size; the intercept is
/// unpenalized.
fn objective(x: &Matrix, y: &[u8], beta: &[f64], l2: f64) -> f64 {
    let n = x.n_rows() as f64;
    let mut nll = KahanSum::default();
    for (i, row) in x.rows_iter().enumerate() {
        let z = margin(row, beta);
        nll.add(if z >= 0.0 { z + (1.0 + (-z).exp()).ln() } else { (1.0 + z.exp()).ln() });
        if y[i] == 1 {
            nll.add(-z);
        }
    }
    let penalty: f64 = beta[1..].iter().map(|b| b * b).sum::<f64>() * l2 / 2.0;
    nll.value() / n + penalty
}

fn margin(row: &[f64], beta: &[f64]) -> f64 {
    let mut z = beta[0];
    for (v, b) in row.iter().zip(&beta[1..]) {
        z += v * b;
    }
    z
}

/// Gradient of [`objective`]: index 0 is the intercept component.
fn gradient(x: &Matrix, y: &[u8], beta: &[f64], l2: f64) -> Vec<f64> {
    let n = x.n_rows() as f64;
    let p = x.n_cols();
    let mut g = vec![KahanSum::default(); p + 1];
    for (i, row) in x.rows_iter().enumerate() {
        let d = sigmoid(margin(row, beta)) - y[i] as f64;
        g[0].add(d);
        for (j, v) in row.iter().enumerate() {
            g[j + 1].add(d * v);
        }
    }
    let mut out: Vec<f64> = g.iter().map(|s| s.value() / n).collect();
    for (gj, bj) in out[1..].iter_mut().zip(&beta[1..]) {
        *gj += l2 * bj;
    }
    out
}

pub fn train_logistic(
    x: &Matrix,
    y: &[u8],
    params: &LogisticParams,
) -> Result<LogisticModel, LearnerError> {
    check_training_inputs(x, y)?;
    if params.l2_penalty < 0.0 || params.tol <= 0.0 || params.max_iter == 0 {
        return Err(LearnerError::InvalidHyperparameter(
            "logistic fit needs l2 >= 0, tol > 0, max_iter >= 1".into(),
        ));
    }

    let n = x.n_rows();
    let p = x.n_cols();
    let dim = p + 1;
    let mut beta = vec![0.0f64; dim];
    let mut obj = objective(x, y, &beta, params.l2_penalty);

    for _ in 0..params.max_iter {
        let grad = gradient(x, y, &beta, params.l2_penalty);
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if grad_norm <= params.tol {
            break;
        }

        // Hessian (1/n)·XᵀWX with the penalty on slope diagonals only
        let mut hess = vec![0.0f64; dim * dim];
        for row in x.rows_iter() {
            let pi = sigmoid(margin(row, &beta));
            let w = (pi * (1.0 - pi)).max(1e-12);
            hess[0] += w;
            for (j, vj) in row.iter().enumerate() {
                hess[j + 1] += w * vj;
                for (k, vk) in row.iter().enumerate().skip(j) {
                    hess[(j + 1) * dim + (k + 1)] += w * vj * vk;
                }
            }
        }
        for v in hess.iter_mut() {
            *v /= n as f64;
        }
        for j in 1..dim {
            hess[j * dim] = hess[j];
            hess[j * dim + j] += params.l2_penalty;
        }
        for j in 1..dim {
            for k in j + 1..dim {
                hess[k * dim + j] = hess[j * dim + k];
            }
        }

        let step = match solve_spd(&hess, &grad, dim) {
            Some(s) => s,
            None => return Err(LearnerError::SeparationDetected),
        };

        let mut t = 1.0f64;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> =
                beta.iter().zip(&step).map(|(b, s)| b - t * s).collect();
            let nobj = objective(x, y, &trial, params.l2_penalty);
            if nobj <= obj + 1e-12 {
                beta = trial;
                obj = nobj;
                accepted = true;
                break;
            }
            t /= 2.0;
        }
        if !accepted {
            break;
        }
        if beta.iter().any(|b| !b.is_finite()) || beta.iter().any(|b| b.abs() > 1e8) {
            return Err(LearnerError::SeparationDetected);
        }
    }

    if gradient(x, y, &beta, params.l2_penalty)
        .iter()
        .map(|g| g * g)
        .sum::<f64>()
        .sqrt()
        > params.tol
    {
        log::warn!("logistic fit stopped at max_iter with gradient above tol");
    }

    // with no penalty, a fit where every point sits confidently on the
    // correct side means the classes are separated and no finite
    // maximizer exists: the iterates were drifting outward, not converging
    if params.l2_penalty == 0.0 {
        let max_resid = x
            .rows_iter()
            .zip(y)
            .map(|(row, &yi)| (sigmoid(margin(row, &beta)) - yi as f64).abs())
            .fold(0.0f64, f64::max);
        if max_resid < 1e-3 {
            return Err(LearnerError::SeparationDetected);
        }
    }

    Ok(LogisticModel {
        intercept: beta[0],
        coefficients: beta[1..].to_vec(),
        l2_penalty: params.l2_penalty,
    })
}

pub fn predict_logistic(m: &LogisticModel, x: &Matrix) -> Result<Vec<f64>, LearnerError> {
    if x.n_cols() != m.coefficients.len() {
        return Err(LearnerError::DimensionMismatch {
            expected: m.coefficients.len(),
            got: x.n_cols(),
        });
    }
    Ok(x.rows_iter()
        .map(|row| {
            let mut z = m.intercept;
            for (v, b) in row.iter().zip(&m.coefficients) {
                z += v * b;
            }
            open_unit(sigmoid(z))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::seeded_stream;
    use crate::metrics::{auroc, ScoredPredictions};
    use rand::Rng;

    #[test]
    fn uninformative_features_give_half_probability() {
        let x = Matrix::from_vec(vec![0.0; 40], 20, 2);
        let y: Vec<u8> = (0..20).map(|i| (i % 2) as u8).collect();
        let m = train_logistic(&x, &y, &LogisticParams::default()).unwrap();
        assert!(m.intercept.abs() < 1e-8);
        assert!(m.coefficients.iter().all(|c| c.abs() < 1e-8));
        let p = predict_logistic(&m, &x).unwrap();
        assert!(p.iter().all(|&v| (v - 0.5).abs() < 1e-8));
    }

    #[test]
    fn perfectly_predictive_feature_gets_positive_coefficient() {
        let y: Vec<u8> = (0..30).map(|i| u8::from(i >= 15)).collect();
        let x = Matrix::from_vec(y.iter().map(|&v| v as f64).collect(), 30, 1);
        let m = train_logistic(
            &x,
            &y,
            &LogisticParams { l2_penalty: 0.1, ..LogisticParams::default() },
        )
        .unwrap();
        assert!(m.coefficients[0] > 0.0);
        let p = predict_logistic(&m, &x).unwrap();
        let sp = ScoredPredictions::new(p, y, "train").unwrap();
        assert_eq!(auroc(&sp).unwrap(), 1.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = seeded_stream(41, 0);
        let n = 60;
        let p = 3;
        let x = Matrix::from_vec((0..n * p).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect(), n, p);
        let y: Vec<u8> = (0..n).map(|_| u8::from(rng.random::<f64>() < 0.5)).collect();
        let beta: Vec<f64> = (0..=p).map(|_| rng.random::<f64>() - 0.5).collect();
        let l2 = 0.05;

        let analytic = gradient(&x, &y, &beta, l2);
        let h = 1e-6;
        for j in 0..=p {
            let mut plus = beta.clone();
            let mut minus = beta.clone();
            plus[j] += h;
            minus[j] -= h;
            let fd = (objective(&x, &y, &plus, l2) - objective(&x, &y, &minus, l2)) / (2.0 * h);
            let rel = (analytic[j] - fd).abs() / fd.abs().max(1e-8);
            assert!(rel < 1e-6, "component {j}: analytic {} vs fd {fd}", analytic[j]);
        }
    }

    #[test]
    fn returned_optimum_has_small_gradient() {
        let mut rng = seeded_stream(42, 0);
        let n = 500;
        let x = Matrix::from_vec((0..n * 2).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect(), n, 2);
        let y: Vec<u8> = x
            .rows_iter()
            .map(|r| u8::from(rng.random::<f64>() < sigmoid(0.8 * r[0] - 0.5 * r[1] + 0.2)))
            .collect();
        let params = LogisticParams::default();
        let m = train_logistic(&x, &y, &params).unwrap();
        let beta: Vec<f64> = std::iter::once(m.intercept).chain(m.coefficients.clone()).collect();
        let g = gradient(&x, &y, &beta, params.l2_penalty);
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(norm <= params.tol, "gradient norm {norm}");
    }

    #[test]
    fn coefficient_recovery_on_synthetic_model() {
        let mut rng = seeded_stream(43, 0);
        let n = 20_000;
        let x = Matrix::from_vec((0..n * 2).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect(), n, 2);
        let y: Vec<u8> = x
            .rows_iter()
            .map(|r| u8::from(rng.random::<f64>() < sigmoid(1.5 * r[0] - 0.7 * r[1])))
            .collect();
        let m = train_logistic(&x, &y, &LogisticParams::default()).unwrap();
        assert!((m.coefficients[0] - 1.5).abs() < 0.1, "b1 {}", m.coefficients[0]);
        assert!((m.coefficients[1] + 0.7).abs() < 0.1, "b2 {}", m.coefficients[1]);
    }

    #[test]
    fn unpenalized_separable_fit_detects_separation() {
        let y: Vec<u8> = (0..40).map(|i| u8::from(i >= 20)).collect();
        let x = Matrix::from_vec(y.iter().map(|&v| v as f64 * 2.0 - 1.0).collect(), 40, 1);
        let r = train_logistic(
            &x,
            &y,
            &LogisticParams { l2_penalty: 0.0, max_iter: 500, ..LogisticParams::default() },
        );
        assert!(matches!(r, Err(LearnerError::SeparationDetected)), "{r:?}");
    }

    #[test]
    fn prediction_formula_spot_values() {
        let m = LogisticModel { intercept: 0.0, coefficients: vec![1.0], l2_penalty: 0.0 };
        let p = predict_logistic(&m, &Matrix::from_vec(vec![1.0], 1, 1)).unwrap();
        assert!((p[0] - 1.0 / (1.0 + (-1.0f64).exp())).abs() < 1e-15);
        assert!((p[0] - 0.7311).abs() < 5e-5);

        let zero = LogisticModel { intercept: 0.0, coefficients: vec![0.0], l2_penalty: 0.0 };
        let p = predict_logistic(&zero, &Matrix::from_vec(vec![3.0], 1, 1)).unwrap();
        assert_eq!(p[0], 0.5);

        // growing intercept pushes probability monotonically toward 1
        let mut last = 0.0;
        for b0 in [0.0, 2.0, 8.0, 30.0] {
            let m = LogisticModel { intercept: b0, coefficients: vec![0.0], l2_penalty: 0.0 };
            let p = predict_logistic(&m, &Matrix::from_vec(vec![0.0], 1, 1)).unwrap();
            assert!(p[0] >= last && p[0] < 1.0);
            last = p[0];
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let m = LogisticModel { intercept: 0.0, coefficients: vec![1.0, 2.0], l2_penalty: 0.0 };
        let r = predict_logistic(&m, &Matrix::from_vec(vec![1.0], 1, 1));
        assert!(matches!(r, Err(LearnerError::DimensionMismatch { expected: 2, got: 1 })));
    }
}
