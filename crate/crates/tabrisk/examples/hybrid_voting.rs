//! Soft voting: average the members' class-1 probabilities, then
//! threshold. The hybrid's score is convex in its members', so it can
//! smooth out their disagreements but never escape their range.

use tabrisk::ensemble::VotingEnsemble;
use tabrisk::learners::{train_gbt, train_random_forest, ForestParams, GbtParams, TrainedModel};
use tabrisk::metrics::{auroc, brier, ScoredPredictions};
use tabrisk::synth::two_gaussians;

fn main() {
    let (xtr, ytr) = two_gaussians(3000, 4, 0.8, 5);
    let (xte, yte) = two_gaussians(3000, 4, 0.8, 6);

    let gbt = TrainedModel::GradientBoosting(
        train_gbt(&xtr, &ytr, &GbtParams { rounds: 120, max_depth: 3, ..Default::default() })
            .unwrap(),
    );
    let rf = TrainedModel::RandomForest(
        train_random_forest(&xtr, &ytr, &ForestParams { trees: 150, ..Default::default() })
            .unwrap(),
    );

    let stat = |scores: &[f64]| {
        let sp = ScoredPredictions::new(scores.to_vec(), yte.clone(), "test").unwrap();
        (auroc(&sp).unwrap(), brier(&sp))
    };
    let p_gbt = gbt.predict_proba(&xte).unwrap();
    let p_rf = rf.predict_proba(&xte).unwrap();

    let hybrid = VotingEnsemble::pair(gbt, rf).unwrap();
    let p_mix = hybrid.predict_proba(&xte).unwrap();
    for i in 0..p_mix.len() {
        assert!((p_mix[i] - 0.5 * (p_gbt[i] + p_rf[i])).abs() < 1e-12);
    }

    let (a, b) = stat(&p_gbt);
    println!("boosting    AUROC {a:.4}  Brier {b:.4}");
    let (a, b) = stat(&p_rf);
    println!("forest      AUROC {a:.4}  Brier {b:.4}");
    let (a, b) = stat(&p_mix);
    println!("50/50 vote  AUROC {a:.4}  Brier {b:.4}");

    let labels = hybrid.classify(&xte, 0.5).unwrap();
    let acc = labels.iter().zip(&yte).filter(|(p, y)| p == y).count() as f64 / yte.len() as f64;
    println!("hybrid accuracy at tau 0.5: {acc:.4}");
}
