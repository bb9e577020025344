//! Seeded synthetic data generators used by the examples and the test
//! suite: Gaussian class pairs with a closed-form best-possible ROC
//! area, score vectors with a known calibration map, and small demo
//! cohorts shaped like the primary and external study files.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::math::{seeded_stream, sigmoid};
use crate::matrix::Matrix;
use crate::tabular::{Cell, Dataset, Provenance, Role, Schema, Source};

/// Balanced binary classes from two spherical unit-variance Gaussians in
/// `dims` dimensions, class 1 shifted by `gap` in every coordinate. The
/// best attainable ROC area is `Φ(gap·√dims / √2)`.
pub fn two_gaussians(n: usize, dims: usize, gap: f64, seed: u64) -> (Matrix, Vec<u8>) {
    let mut rng = seeded_stream(seed, 0);
    let n_pos = n / 2;
    let mut x = Matrix::zeros(0, dims);
    let mut y = Vec::with_capacity(n);
    let mut row = vec![0.0f64; dims];
    for i in 0..n {
        let label = u8::from(i >= n - n_pos);
        for v in row.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *v = z + gap * label as f64;
        }
        x.push_row(&row);
        y.push(label);
    }
    (x, y)
}

/// Scores in (0,1) whose true recalibration map is exactly
/// `P(y=1|s) = sigmoid(intercept + slope·logit(s))`.
pub fn scores_with_calibration(
    n: usize,
    slope: f64,
    intercept: f64,
    seed: u64,
) -> (Vec<f64>, Vec<u8>) {
    let mut rng = seeded_stream(seed, 1);
    let mut scores = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let z: f64 = rng.sample(StandardNormal);
        let s = sigmoid(1.25 * z);
        let p = sigmoid(intercept + slope * (s / (1.0 - s)).ln());
        scores.push(s);
        labels.push(u8::from(rng.random::<f64>() < p));
    }
    (scores, labels)
}

fn normal(rng: &mut impl Rng, mean: f64, sd: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    mean + sd * z
}

fn pick<'a>(rng: &mut impl Rng, weighted: &[(&'a str, f64)]) -> &'a str {
    let total: f64 = weighted.iter().map(|(_, w)| w).sum();
    let mut u = rng.random::<f64>() * total;
    for (token, w) in weighted {
        if u < *w {
            return token;
        }
        u -= w;
    }
    weighted.last().unwrap().0
}

/// Demo cohort shaped like the primary training file: strong glycemic
/// signal, mild demographic signal, a little missingness in `bmi`, and
/// prevalence near 9%.
pub fn synthetic_primary_cohort(n: usize, seed: u64) -> Dataset {
    let mut rng = seeded_stream(seed, 2);
    let schema = Schema::primary_diabetes();
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let y = u8::from(rng.random::<f64>() < 0.088);
        let shift = y as f64;
        let gender = pick(&mut rng, &[("Female", 0.58), ("Male", 0.41), ("Other", 0.01)]);
        let age = (rng.random::<f64>() * 62.0 + 18.0 + 6.0 * shift).min(80.0);
        let hypertension = u8::from(rng.random::<f64>() < 0.07 + 0.13 * shift);
        let heart = u8::from(rng.random::<f64>() < 0.04 + 0.10 * shift);
        let smoking = pick(
            &mut rng,
            &[
                ("never", 0.35),
                ("No Info", 0.33),
                ("former", 0.09 + 0.05 * shift),
                ("current", 0.09),
                ("not current", 0.06),
                ("ever", 0.04),
            ],
        );
        let bmi = normal(&mut rng, 27.1 + 2.1 * shift, 5.8).clamp(14.0, 60.0);
        let hba1c = if y == 1 {
            normal(&mut rng, 6.9, 0.9).clamp(5.0, 9.0)
        } else {
            normal(&mut rng, 5.6, 0.62).clamp(3.5, 6.6)
        };
        let glucose = if y == 1 {
            normal(&mut rng, 185.0, 40.0).clamp(80.0, 300.0).round()
        } else {
            normal(&mut rng, 132.0, 28.0).clamp(80.0, 300.0).round()
        };
        let bmi_cell = if rng.random::<f64>() < 0.025 {
            Cell::Missing
        } else {
            Cell::Num((bmi * 100.0).round() / 100.0)
        };
        rows.push(vec![
            Cell::Token(gender.to_string()),
            Cell::Num((age * 10.0).round() / 10.0),
            Cell::Num(hypertension as f64),
            Cell::Num(heart as f64),
            Cell::Token(smoking.to_string()),
            bmi_cell,
            Cell::Num((hba1c * 10.0).round() / 10.0),
            Cell::Num(glucose),
            Cell::Num(y as f64),
        ]);
    }
    Dataset::new(schema, rows, Provenance::new(Source::Primary, Role::Full))
        .expect("generated rows satisfy the schema")
}

/// Demo cohort shaped like the external validation file, including its
/// zero-inflated measurement columns and ~35% prevalence.
pub fn synthetic_external_cohort(n: usize, seed: u64) -> Dataset {
    let mut rng = seeded_stream(seed, 3);
    let schema = Schema::pima();
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let y = u8::from(rng.random::<f64>() < 0.349);
        let shift = y as f64;
        let pregnancies = (rng.random::<f64>() * 9.0 * rng.random::<f64>()).floor();
        let glucose = if rng.random::<f64>() < 0.007 {
            0.0
        } else {
            normal(&mut rng, 112.0 + 30.0 * shift, 26.0).clamp(44.0, 199.0).round()
        };
        let pressure = if rng.random::<f64>() < 0.045 {
            0.0
        } else {
            normal(&mut rng, 69.0 + 3.0 * shift, 13.0).clamp(24.0, 122.0).round()
        };
        let skin = if rng.random::<f64>() < 0.29 {
            0.0
        } else {
            normal(&mut rng, 29.0 + 3.0 * shift, 10.0).clamp(7.0, 99.0).round()
        };
        let insulin = if rng.random::<f64>() < 0.48 {
            0.0
        } else {
            normal(&mut rng, 120.0 + 50.0 * shift, 85.0).clamp(14.0, 700.0).round()
        };
        let bmi = if rng.random::<f64>() < 0.014 {
            0.0
        } else {
            normal(&mut rng, 31.1 + 2.6 * shift, 6.9).clamp(18.0, 67.0)
        };
        let pedigree = (0.078 + rng.random::<f64>().powi(2) * (1.2 + 0.4 * shift))
            .min(2.42);
        let age = (21.0 + rng.random::<f64>().powi(2) * (40.0 + 12.0 * shift)).round();
        rows.push(vec![
            Cell::Num(pregnancies),
            Cell::Num(glucose),
            Cell::Num(pressure),
            Cell::Num(skin),
            Cell::Num(insulin),
            Cell::Num((bmi * 10.0).round() / 10.0),
            Cell::Num((pedigree * 1000.0).round() / 1000.0),
            Cell::Num(age),
            Cell::Num(y as f64),
        ]);
    }
    Dataset::new(schema, rows, Provenance::new(Source::External, Role::Full))
        .expect("generated rows satisfy the schema")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::normal_cdf;
    use crate::metrics::{auroc, ScoredPredictions};
    use crate::tabular::class_distribution;

    #[test]
    fn gaussian_pair_reaches_its_analytic_ceiling() {
        let (x, y) = two_gaussians(6000, 4, 0.5, 7);
        // the likelihood-ratio score for equal spherical covariances is
        // the coordinate sum; squashing it is monotone so the ROC area
        // still estimates the ceiling
        let scores: Vec<f64> = x.rows_iter().map(|r| sigmoid(r.iter().sum())).collect();
        let sp = ScoredPredictions::new(scores, y, "synthetic").unwrap();
        let auc = auroc(&sp).unwrap();
        let bayes = normal_cdf(0.5 * 2.0 / std::f64::consts::SQRT_2);
        assert!((auc - bayes).abs() < 0.02, "auc {auc} vs {bayes}");
    }

    #[test]
    fn gaussian_pair_is_balanced_and_seeded() {
        let (x, y) = two_gaussians(1001, 3, 1.0, 3);
        assert_eq!(x.n_rows(), 1001);
        assert_eq!(y.iter().filter(|&&v| v == 1).count(), 500);
        let (x2, y2) = two_gaussians(1001, 3, 1.0, 3);
        assert_eq!(x, x2);
        assert_eq!(y, y2);
    }

    #[test]
    fn calibrated_scores_have_the_requested_prevalence_link() {
        let (scores, labels) = scores_with_calibration(20_000, 1.0, 0.0, 5);
        // slope 1, intercept 0 means the scores are already calibrated:
        // mean score tracks prevalence
        let mean_s: f64 = scores.iter().sum::<f64>() / scores.len() as f64;
        let prev = labels.iter().map(|&v| v as f64).sum::<f64>() / labels.len() as f64;
        assert!((mean_s - prev).abs() < 0.02, "mean {mean_s} vs prevalence {prev}");
    }

    #[test]
    fn primary_cohort_matches_its_schema_and_prevalence() {
        let ds = synthetic_primary_cohort(4000, 11);
        assert_eq!(ds.schema(), &Schema::primary_diabetes());
        let (_, _, prev) = class_distribution(&ds);
        assert!((prev - 0.088).abs() < 0.03, "prevalence {prev}");
    }

    #[test]
    fn external_cohort_has_zero_inflated_measurements() {
        let ds = synthetic_external_cohort(3000, 13);
        assert_eq!(ds.schema(), &Schema::pima());
        let idx = ds.schema().column_index("Insulin").unwrap();
        let zeros = ds
            .rows()
            .iter()
            .filter(|r| matches!(r[idx], Cell::Num(v) if v == 0.0))
            .count();
        let frac = zeros as f64 / ds.n_rows() as f64;
        assert!(frac > 0.35 && frac < 0.6, "insulin zero fraction {frac}");
    }
}
