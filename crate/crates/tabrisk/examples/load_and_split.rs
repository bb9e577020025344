//! CSV ingestion and the seeded stratified 70/30 split.

use tabrisk::synth::synthetic_primary_cohort;
use tabrisk::tabular::{class_distribution, load_csv, save_csv, split_train_test, Schema, Source};

fn main() {
    let dir = std::env::temp_dir().join("tabrisk_load_and_split");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("primary.csv");
    save_csv(&synthetic_primary_cohort(5000, 3), &path).unwrap();

    let ds = load_csv(&path, &Schema::primary_diabetes(), Source::Primary).unwrap();
    let (neg, pos, prev) = class_distribution(&ds);
    println!("loaded {} rows: {neg} negative, {pos} positive (prevalence {prev:.3})", ds.n_rows());

    let split = split_train_test(&ds, 0.7, 42, true).unwrap();
    let (_, _, train_prev) = class_distribution(&split.train);
    let (_, _, test_prev) = class_distribution(&split.test);
    println!(
        "train {} rows (prevalence {train_prev:.3}), test {} rows (prevalence {test_prev:.3})",
        split.train.n_rows(),
        split.test.n_rows()
    );

    // same seed, same membership
    let again = split_train_test(&ds, 0.7, 42, true).unwrap();
    assert_eq!(split.indices(), again.indices());
    println!("seed 42 reproduces the split exactly");

    let other = split_train_test(&ds, 0.7, 43, true).unwrap();
    println!(
        "seed 43 shares {} of {} test rows with seed 42",
        other
            .indices()
            .test_indices
            .iter()
            .filter(|i| split.indices().test_indices.contains(i))
            .count(),
        split.indices().test_indices.len()
    );
}
