//! ROC and precision-recall curves, Brier score, calibration refit, and
//! the reliability diagram, on scores whose true calibration is known.

use tabrisk::metrics::{
    auprc, auroc, brier, calibration_fit, pr_curve, reliability_bins, roc_curve, ScoredPredictions,
};
use tabrisk::synth::scores_with_calibration;

fn main() {
    // recalibration map slope 1, intercept 0: honestly calibrated
    let (scores, labels) = scores_with_calibration(5000, 1.0, 0.0, 0);
    let sp = ScoredPredictions::new(scores, labels, "demo").unwrap();

    println!("prevalence {:.3}", sp.prevalence());
    println!("AUROC {:.4}   AUPRC {:.4}   Brier {:.4}", auroc(&sp).unwrap(), auprc(&sp).unwrap(), brier(&sp));

    let (slope, intercept) = calibration_fit(&sp).unwrap();
    println!("calibration slope {slope:.3}, intercept {intercept:+.3} (ideal 1, 0)");

    let roc = roc_curve(&sp).unwrap();
    let pr = pr_curve(&sp).unwrap();
    println!("ROC curve: {} points from (0,0) to (1,1)", roc.points.len());
    println!("PR curve:  {} points, baseline {:.3}", pr.points.len(), sp.prevalence());

    println!("reliability, 10 equal-width bins:");
    for bin in reliability_bins(&sp, 10).unwrap() {
        if bin.count == 0 {
            continue;
        }
        println!(
            "  [{:.1}, {:.1})  predicted {:.3}  observed {:.3}  n={}",
            bin.lower, bin.upper, bin.mean_predicted, bin.observed_frequency, bin.count
        );
    }

    // overconfident scores: outcomes only follow half the stated logit
    let (scores, labels) = scores_with_calibration(5000, 0.5, 0.0, 0);
    let over = ScoredPredictions::new(scores, labels, "overconfident").unwrap();
    let (slope, _) = calibration_fit(&over).unwrap();
    println!(
        "overconfident cohort: AUROC {:.4}, refit slope {slope:.3} (logits need shrinking)",
        auroc(&over).unwrap()
    );
}
