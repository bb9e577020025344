//! End-to-end experiment on synthetic cohorts: prepare, train, evaluate
//! the held-out split, validate on a shifted external cohort, render the
//! report. The bundle lands under `target/example_bundles/full_experiment`
//! so you can inspect every artifact afterwards.

use std::path::Path;

use tabrisk::runner::{
    cmd_evaluate, cmd_external_validate, cmd_prepare, cmd_report, cmd_train, EvalOverrides,
    ExperimentConfig,
};
use tabrisk::synth::{synthetic_external_cohort, synthetic_primary_cohort};
use tabrisk::tabular::save_csv;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new("target/example_bundles/full_experiment");
    std::fs::create_dir_all(root)?;
    let primary_csv = root.join("primary.csv");
    let external_csv = root.join("external.csv");
    save_csv(&synthetic_primary_cohort(3000, 11), &primary_csv)?;
    save_csv(&synthetic_external_cohort(500, 12), &external_csv)?;

    let mut cfg = ExperimentConfig::for_primary(&primary_csv);
    cfg.external_csv = Some(external_csv);
    // modest budgets keep the demo under a minute
    cfg.learners.boosting.rounds = 80;
    cfg.learners.boosting.max_depth = 3;
    cfg.learners.forest.trees = 80;
    cfg.learners.svm_subsample = 600;
    cfg.bootstrap.resamples = 200;

    let out = root.join("out");
    let prepared = cmd_prepare(&cfg, &out)?;
    println!(
        "prepare: {} rows -> {} train / {} test (prevalence {:.3})",
        prepared.primary.rows,
        prepared.split.train_rows,
        prepared.split.test_rows,
        prepared.primary.prevalence
    );

    let manifest = cmd_train(&cfg, &out)?;
    println!(
        "train: SMOTE {} -> {} rows, SVM pair on {} rows, models: {:?}",
        manifest.smote.rows_before,
        manifest.smote.rows_after,
        manifest.svm_subsample.taken,
        manifest.model_files
    );

    let internal = cmd_evaluate(&out, &EvalOverrides::default())?;
    let external = cmd_external_validate(&out, &EvalOverrides::default())?;
    for report in [&internal, &external] {
        for (name, m) in &report.models {
            println!(
                "{:>13} {name}: AUROC {:.3} [{:.3}, {:.3}], AUPRC {:.3}, Brier {:.4}",
                report.cohort, m.auroc, m.auroc_ci[0], m.auroc_ci[1], m.auprc, m.brier
            );
        }
    }

    let summary = cmd_report(&out)?;
    println!("report: {} plots, cohorts {:?}", summary.plots.len(), summary.cohorts);
    if let Some(att) = &summary.attenuation {
        let d = &att.models["xgb_rf"];
        println!("xgb_rf attenuation external - internal: AUROC {:+.3}", d["auroc"]);
    }
    println!("bundle: {}", out.display());
    Ok(())
}
