//! Fit the preprocessing pipeline on the training split only, freeze it
//! to JSON, and apply the stored parameters verbatim elsewhere. Fitting
//! on anything but a training split is refused outright.

use std::collections::BTreeSet;

use tabrisk::preprocess::{
    apply_pipeline, fit_pipeline, load_pipeline, save_pipeline, FeatureMapping, PreprocessConfig,
};
use tabrisk::synth::synthetic_primary_cohort;
use tabrisk::tabular::split_train_test;

fn main() {
    let ds = synthetic_primary_cohort(4000, 9);
    let split = split_train_test(&ds, 0.7, 42, true).unwrap();

    let config = PreprocessConfig {
        zeros_as_missing: BTreeSet::from(["BMI".to_string()]),
        mapping: Some(FeatureMapping::pima_default()),
    };
    let pipeline = fit_pipeline(&split.train, &config).unwrap();
    println!("fit on {} training rows", split.train.n_rows());
    println!("schema fingerprint {}", &pipeline.fingerprint[..16]);
    for name in pipeline.feature_names() {
        let fill = pipeline.imputer.fill_value(&name).unwrap();
        println!("  {name}: fill {fill}");
    }

    let err = fit_pipeline(&split.test, &config).unwrap_err();
    println!("fitting on the test split: {err}");

    let path = std::env::temp_dir().join("tabrisk_pipeline.json");
    save_pipeline(&pipeline, &path).unwrap();
    let restored = load_pipeline(&path).unwrap();
    assert_eq!(restored, pipeline);

    // stored parameters transform held-out rows; nothing is re-estimated
    let block = apply_pipeline(&restored, &split.test).unwrap();
    println!(
        "test block {} x {}, {:.2}% of scaled cells outside [0,1]",
        block.features.n_rows(),
        block.features.n_cols(),
        100.0 * block.oor_fraction
    );
}
