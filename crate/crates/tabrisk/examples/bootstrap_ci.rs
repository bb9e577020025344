//! Percentile bootstrap intervals for threshold-free metrics. Resamples
//! are stratified by class and drawn from per-slot seeded streams, so a
//! given (data, seed, B) always yields the same interval.

use tabrisk::metrics::{auprc, auroc, ScoredPredictions};
use tabrisk::stats::bootstrap_ci;
use tabrisk::synth::scores_with_calibration;

fn main() {
    let (scores, labels) = scores_with_calibration(1200, 1.0, 0.0, 9);
    let sp = ScoredPredictions::new(scores, labels, "demo").unwrap();

    let auc_ci = bootstrap_ci(auroc, &sp, 1000, 7).unwrap();
    println!(
        "AUROC {:.4}, 95% CI [{:.4}, {:.4}] over {} resamples",
        auc_ci.point, auc_ci.lower, auc_ci.upper, auc_ci.resamples
    );

    let ap_ci = bootstrap_ci(auprc, &sp, 1000, 7).unwrap();
    println!("AUPRC {:.4}, 95% CI [{:.4}, {:.4}]", ap_ci.point, ap_ci.lower, ap_ci.upper);

    assert_eq!(bootstrap_ci(auroc, &sp, 1000, 7).unwrap(), auc_ci);
    println!("same seed, same interval");

    // more data, tighter interval
    let (scores, labels) = scores_with_calibration(12_000, 1.0, 0.0, 9);
    let big = ScoredPredictions::new(scores, labels, "demo").unwrap();
    let tight = bootstrap_ci(auroc, &big, 1000, 7).unwrap();
    println!(
        "10x the rows: width {:.4} vs {:.4}",
        tight.upper - tight.lower,
        auc_ci.upper - auc_ci.lower
    );
}
