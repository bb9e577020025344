//! Weighted soft voting over trained member models.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::learners::{LearnerError, TrainedModel};
use crate::matrix::Matrix;

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("a voting ensemble needs at least two members, got {got}")]
    TooFewMembers { got: usize },
    #[error("member weights must be non-negative and finite with a positive sum")]
    InvalidWeights,
    #[error("members disagree on input width: {0} vs {1}")]
    MemberWidthMismatch(usize, usize),
    #[error(transparent)]
    Member(#[from] LearnerError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Member {
    pub weight: f64,
    pub model: TrainedModel,
}

/// Soft-vote combiner: `p(x) = Σ w_m · p_m(x)` with the weights
/// normalized to sum 1 at construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VotingEnsemble {
    members: Vec<Member>,
}

impl VotingEnsemble {
    /// Weights are rescaled to sum 1; relative proportions are what
    /// matters, so `(1, 1)` and `(0.5, 0.5)` build the same ensemble.
    pub fn new(members: Vec<(TrainedModel, f64)>) -> Result<Self, EnsembleError> {
        if members.len() < 2 {
            return Err(EnsembleError::TooFewMembers { got: members.len() });
        }
        let total: f64 = members.iter().map(|(_, w)| w).sum();
        if !total.is_finite() || total <= 0.0 || members.iter().any(|(_, w)| *w < 0.0 || !w.is_finite()) {
            return Err(EnsembleError::InvalidWeights);
        }
        let width = members[0].0.n_features();
        for (m, _) in &members {
            if m.n_features() != width {
                return Err(EnsembleError::MemberWidthMismatch(width, m.n_features()));
            }
        }
        Ok(VotingEnsemble {
            members: members
                .into_iter()
                .map(|(model, w)| Member { weight: w / total, model })
                .collect(),
        })
    }

    /// Two members at equal weight, the common case for the hybrids.
    pub fn pair(a: TrainedModel, b: TrainedModel) -> Result<Self, EnsembleError> {
        VotingEnsemble::new(vec![(a, 0.5), (b, 0.5)])
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn n_features(&self) -> usize {
        self.members[0].model.n_features()
    }

    /// Weighted average of member class-1 probabilities; a convex
    /// combination, so the output stays inside the members' range.
    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>, EnsembleError> {
        let mut combined = vec![0.0; x.n_rows()];
        for member in &self.members {
            let p = member.model.predict_proba(x)?;
            for (acc, pi) in combined.iter_mut().zip(p) {
                *acc += member.weight * pi;
            }
        }
        Ok(combined)
    }

    /// Thresholded labels: 1 iff `p ≥ τ` (ties go to the positive
    /// class). `τ` must lie strictly inside (0, 1).
    pub fn classify(&self, x: &Matrix, tau: f64) -> Result<Vec<u8>, EnsembleError> {
        assert!(tau > 0.0 && tau < 1.0, "threshold must be in (0, 1), got {tau}");
        Ok(self.predict_proba(x)?.iter().map(|&p| u8::from(p >= tau)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::LogisticModel;
    use crate::math::logit;

    fn constant_model(p: f64, width: usize) -> TrainedModel {
        TrainedModel::Logistic(LogisticModel {
            intercept: logit(p),
            coefficients: vec![0.0; width],
            l2_penalty: 0.0,
        })
    }

    fn sloped_model(intercept: f64, slope: f64) -> TrainedModel {
        TrainedModel::Logistic(LogisticModel {
            intercept,
            coefficients: vec![slope],
            l2_penalty: 0.0,
        })
    }

    #[test]
    fn equal_weights_average_member_probabilities() {
        let e = VotingEnsemble::pair(constant_model(0.2, 1), constant_model(0.6, 1)).unwrap();
        let p = e.predict_proba(&Matrix::from_vec(vec![3.0], 1, 1)).unwrap();
        assert!((p[0] - 0.4).abs() < 1e-9, "got {}", p[0]);
    }

    #[test]
    fn zero_weight_member_is_ignored() {
        let x = Matrix::from_vec(vec![-1.0, 0.0, 2.5], 3, 1);
        let a = sloped_model(0.3, 1.2);
        let solo = a.predict_proba(&x).unwrap();
        let e = VotingEnsemble::new(vec![(a, 1.0), (constant_model(0.9, 1), 0.0)]).unwrap();
        assert_eq!(e.predict_proba(&x).unwrap(), solo);
    }

    #[test]
    fn output_is_a_convex_combination_of_members() {
        let x = Matrix::from_vec((0..40).map(|i| i as f64 / 4.0 - 5.0).collect(), 40, 1);
        let a = sloped_model(0.4, 1.7);
        let b = sloped_model(-1.1, 0.6);
        let (pa, pb) = (a.predict_proba(&x).unwrap(), b.predict_proba(&x).unwrap());
        let e = VotingEnsemble::new(vec![(a, 0.3), (b, 0.7)]).unwrap();
        for (p, (qa, qb)) in e.predict_proba(&x).unwrap().iter().zip(pa.iter().zip(&pb)) {
            assert!(*p >= qa.min(*qb) - 1e-15 && *p <= qa.max(*qb) + 1e-15);
            assert!(*p >= 0.0 && *p <= 1.0);
        }
    }

    #[test]
    fn weight_scale_does_not_change_labels() {
        let x = Matrix::from_vec((0..25).map(|i| i as f64 - 12.0).collect(), 25, 1);
        let small = VotingEnsemble::new(vec![(sloped_model(0.2, 0.9), 0.3), (sloped_model(-0.5, 1.4), 0.7)]).unwrap();
        let scaled = VotingEnsemble::new(vec![(sloped_model(0.2, 0.9), 3.0), (sloped_model(-0.5, 1.4), 7.0)]).unwrap();
        assert_eq!(small.classify(&x, 0.5).unwrap(), scaled.classify(&x, 0.5).unwrap());
    }

    #[test]
    fn raising_the_threshold_never_adds_positives() {
        let x = Matrix::from_vec((0..30).map(|i| i as f64 / 3.0 - 5.0).collect(), 30, 1);
        let e = VotingEnsemble::pair(sloped_model(0.1, 1.0), sloped_model(-0.3, 0.8)).unwrap();
        let lo = e.classify(&x, 0.3).unwrap();
        let hi = e.classify(&x, 0.7).unwrap();
        for (l, h) in lo.iter().zip(&hi) {
            assert!(l >= h, "label flipped 0 to 1 as the threshold rose");
        }
    }

    #[test]
    fn probability_exactly_at_threshold_is_positive() {
        let e = VotingEnsemble::pair(constant_model(0.5, 1), constant_model(0.5, 1)).unwrap();
        assert_eq!(e.classify(&Matrix::from_vec(vec![7.0], 1, 1), 0.5).unwrap(), vec![1]);
    }

    #[test]
    fn extreme_threshold_rejects_everything() {
        let x = Matrix::from_vec(vec![0.0, 1.0, 2.0], 3, 1);
        let e = VotingEnsemble::pair(constant_model(0.95, 1), constant_model(0.99, 1)).unwrap();
        assert_eq!(e.classify(&x, 0.999).unwrap(), vec![0, 0, 0]);
    }

    #[test]
    fn construction_rejects_bad_inputs() {
        assert!(matches!(
            VotingEnsemble::new(vec![(constant_model(0.5, 1), 1.0)]),
            Err(EnsembleError::TooFewMembers { got: 1 })
        ));
        assert!(matches!(
            VotingEnsemble::new(vec![(constant_model(0.5, 1), -0.1), (constant_model(0.5, 1), 1.0)]),
            Err(EnsembleError::InvalidWeights)
        ));
        assert!(matches!(
            VotingEnsemble::new(vec![(constant_model(0.5, 1), 0.0), (constant_model(0.5, 1), 0.0)]),
            Err(EnsembleError::InvalidWeights)
        ));
        assert!(matches!(
            VotingEnsemble::new(vec![(constant_model(0.5, 1), 0.5), (constant_model(0.5, 2), 0.5)]),
            Err(EnsembleError::MemberWidthMismatch(1, 2))
        ));
    }

    #[test]
    fn serde_round_trip_preserves_predictions() {
        let x = Matrix::from_vec(vec![-2.0, 0.5, 4.0], 3, 1);
        let e = VotingEnsemble::pair(sloped_model(0.2, 1.1), constant_model(0.3, 1)).unwrap();
        let json = serde_json::to_string(&e).unwrap();
        let back: VotingEnsemble = serde_json::from_str(&json).unwrap();
        assert_eq!(e.predict_proba(&x).unwrap(), back.predict_proba(&x).unwrap());
    }
}
