//! External-cohort validation: a model trained on the primary cohort is
//! scored on a differently-shaped external file. The frozen pipeline's
//! crosswalk renames the overlapping columns, fills the rest from the
//! stored imputer, and applies the stored scaling; no parameter is
//! re-estimated outside the training split.

use std::collections::BTreeSet;

use tabrisk::learners::{predict_gbt_proba, train_gbt, GbtParams};
use tabrisk::metrics::{auroc, brier, ScoredPredictions};
use tabrisk::preprocess::{apply_pipeline, fit_pipeline, FeatureMapping, PreprocessConfig};
use tabrisk::synth::{synthetic_external_cohort, synthetic_primary_cohort};
use tabrisk::tabular::split_train_test;

fn main() {
    let primary = synthetic_primary_cohort(4000, 31);
    let external = synthetic_external_cohort(600, 32);
    let split = split_train_test(&primary, 0.7, 42, true).unwrap();

    let config = PreprocessConfig {
        zeros_as_missing: BTreeSet::from(["Glucose".to_string(), "BMI".to_string()]),
        mapping: Some(FeatureMapping::pima_default()),
    };
    let pipeline = fit_pipeline(&split.train, &config).unwrap();

    let train = apply_pipeline(&pipeline, &split.train).unwrap();
    let test = apply_pipeline(&pipeline, &split.test).unwrap();
    let ext = apply_pipeline(&pipeline, &external).unwrap();
    println!(
        "external harmonized to {} model inputs; columns with no counterpart dropped: {:?}",
        ext.features.n_cols(),
        ext.dropped_columns
    );

    let gbt = train_gbt(
        &train.features,
        &train.labels,
        &GbtParams { rounds: 120, max_depth: 3, ..Default::default() },
    )
    .unwrap();

    for block in [("internal test", &test), ("external", &ext)] {
        let (name, b) = block;
        let sp = ScoredPredictions::new(
            predict_gbt_proba(&gbt, &b.features).unwrap(),
            b.labels.clone(),
            name,
        )
        .unwrap();
        println!(
            "{name:>13}: AUROC {:.4}  Brier {:.4}  prevalence {:.3}",
            auroc(&sp).unwrap(),
            brier(&sp),
            sp.prevalence()
        );
    }
}
