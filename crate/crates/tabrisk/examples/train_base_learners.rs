//! All four base learners on a cohort with a known answer: two 4-d
//! Gaussians with mean gap 0.5 per dimension have a Bayes-optimal AUROC
//! of Phi(1/sqrt(2)), about 0.760. Nothing should beat it; everything
//! should get close.

use tabrisk::learners::{
    apply_platt, fit_platt, svm_decision_value, train_gbt, train_logistic, train_random_forest,
    train_svm, ForestParams, GbtParams, LogisticParams, SvmParams,
};
use tabrisk::metrics::{auroc, ScoredPredictions};
use tabrisk::synth::two_gaussians;

fn main() {
    let (xtr, ytr) = two_gaussians(4000, 4, 0.5, 1);
    let (xte, yte) = two_gaussians(4000, 4, 0.5, 2);
    let bayes = 0.7602;

    let auc = |scores: Vec<f64>| {
        auroc(&ScoredPredictions::new(scores, yte.clone(), "test").unwrap()).unwrap()
    };

    let lr = train_logistic(&xtr, &ytr, &LogisticParams::default()).unwrap();
    println!("logistic           {:.4}  (bayes {bayes})", auc(tabrisk::learners::predict_logistic(&lr, &xte).unwrap()));

    let svm = train_svm(&xtr, &ytr, &SvmParams::default()).unwrap();
    let margins_tr = svm_decision_value(&svm, &xtr).unwrap();
    let platt = fit_platt(&margins_tr, &ytr, 1e-8).unwrap();
    let margins_te = svm_decision_value(&svm, &xte).unwrap();
    println!("svm + platt        {:.4}", auc(apply_platt(&platt, &margins_te)));

    let rf = train_random_forest(&xtr, &ytr, &ForestParams { trees: 200, ..Default::default() }).unwrap();
    println!("random forest      {:.4}", auc(tabrisk::learners::predict_rf_proba(&rf, &xte).unwrap()));

    let gbt = train_gbt(&xtr, &ytr, &GbtParams { rounds: 150, max_depth: 3, ..Default::default() }).unwrap();
    println!("gradient boosting  {:.4}", auc(tabrisk::learners::predict_gbt_proba(&gbt, &xte).unwrap()));
}
