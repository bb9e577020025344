//! Sigmoid calibration mapping raw decision margins to probabilities.

use serde::{Deserialize, Serialize};

use super::{open_unit, LearnerError};
use crate::math::{fit_scalar_logistic, logit, sigmoid};

/// `p = sigmoid(slope · margin + intercept)`. Monotone increasing in the
/// margin whenever `slope > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlattCalibrator {
    pub slope: f64,
    pub intercept: f64,
}

/// Fit the calibrator on training margins by a 1-D penalized logistic
/// regression of the labels on the margin. Margins that are all
/// identical carry no signal; the calibrator then returns the constant
/// training prevalence.
pub fn fit_platt(margins: &[f64], y: &[u8], tol: f64) -> Result<PlattCalibrator, LearnerError> {
    if margins.len() != y.len() {
        return Err(LearnerError::LengthMismatch { rows: margins.len(), labels: y.len() });
    }
    if margins.is_empty() {
        return Err(LearnerError::Degenerate("no margins to calibrate on".into()));
    }
    if let Some(row) = y.iter().position(|&v| v > 1) {
        return Err(LearnerError::LabelNotBinary { row });
    }
    if tol <= 0.0 {
        return Err(LearnerError::InvalidHyperparameter("calibration tol must be > 0".into()));
    }

    let spread = margins.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
        - margins.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if spread == 0.0 {
        let prevalence =
            y.iter().map(|&v| v as f64).sum::<f64>() / y.len() as f64;
        return Ok(PlattCalibrator {
            slope: 0.0,
            intercept: logit(prevalence.clamp(1e-6, 1.0 - 1e-6)),
        });
    }

    let (intercept, slope) = fit_scalar_logistic(margins, y, 1e-8, tol, 100);
    Ok(PlattCalibrator { slope, intercept })
}

pub fn apply_platt(c: &PlattCalibrator, margins: &[f64]) -> Vec<f64> {
    margins.iter().map(|&m| open_unit(sigmoid(c.slope * m + c.intercept))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::seeded_stream;
    use rand::Rng;

    #[test]
    fn recovers_generating_slope() {
        let mut rng = seeded_stream(51, 0);
        let margins: Vec<f64> = (0..5000).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        let y: Vec<u8> =
            margins.iter().map(|&m| u8::from(rng.random::<f64>() < sigmoid(2.0 * m))).collect();
        let c = fit_platt(&margins, &y, 1e-10).unwrap();
        assert!((c.slope - 2.0).abs() <= 0.15, "slope {}", c.slope);
        assert!(c.intercept.abs() < 0.2, "intercept {}", c.intercept);
    }

    #[test]
    fn constant_margins_yield_prevalence() {
        let margins = vec![0.3; 10];
        let y = vec![1, 1, 1, 0, 0, 0, 0, 0, 0, 0];
        let c = fit_platt(&margins, &y, 1e-8).unwrap();
        assert_eq!(c.slope, 0.0);
        let p = apply_platt(&c, &margins);
        assert!(p.iter().all(|&v| (v - 0.3).abs() < 1e-12));
    }

    #[test]
    fn confident_correct_margins_drive_brier_to_zero() {
        let margins: Vec<f64> = (0..40).map(|i| if i % 2 == 0 { 25.0 } else { -25.0 }).collect();
        let y: Vec<u8> = (0..40).map(|i| u8::from(i % 2 == 0)).collect();
        let c = fit_platt(&margins, &y, 1e-10).unwrap();
        let p = apply_platt(&c, &margins);
        let brier: f64 =
            p.iter().zip(&y).map(|(&pi, &yi)| (pi - yi as f64).powi(2)).sum::<f64>() / 40.0;
        assert!(brier < 1e-4, "brier {brier}");
        assert!(p.iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn positive_slope_is_monotone() {
        let c = PlattCalibrator { slope: 1.7, intercept: -0.4 };
        let grid: Vec<f64> = (0..50).map(|i| i as f64 / 5.0 - 5.0).collect();
        let p = apply_platt(&c, &grid);
        for w in p.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn rejects_mismatched_and_empty_input() {
        assert!(matches!(
            fit_platt(&[0.1], &[1, 0], 1e-8),
            Err(LearnerError::LengthMismatch { .. })
        ));
        assert!(matches!(fit_platt(&[], &[], 1e-8), Err(LearnerError::Degenerate(_))));
    }
}
