//! Comparing two classifiers on the same cases: DeLong for the AUC
//! difference, McNemar for thresholded disagreements. Pairing matters;
//! both tests keep the per-case correlation that independent-sample
//! tests would throw away.

use tabrisk::learners::{train_gbt, train_logistic, GbtParams, LogisticParams};
use tabrisk::metrics::{auroc, ScoredPredictions};
use tabrisk::stats::{delong_test, mcnemar_test, Effect};
use tabrisk::synth::two_gaussians;

fn main() {
    let (xtr, ytr) = two_gaussians(3000, 4, 0.7, 3);
    let (xte, yte) = two_gaussians(3000, 4, 0.7, 4);

    let gbt = train_gbt(&xtr, &ytr, &GbtParams { rounds: 150, max_depth: 3, ..Default::default() })
        .unwrap();
    let lr = train_logistic(&xtr, &ytr, &LogisticParams::default()).unwrap();

    let pa = tabrisk::learners::predict_gbt_proba(&gbt, &xte).unwrap();
    let pb = tabrisk::learners::predict_logistic(&lr, &xte).unwrap();
    let auc = |s: &Vec<f64>| {
        auroc(&ScoredPredictions::new(s.clone(), yte.clone(), "test").unwrap()).unwrap()
    };
    println!("boosting AUROC {:.4}, logistic AUROC {:.4}", auc(&pa), auc(&pb));

    let dl = delong_test(&pa, &pb, &yte).unwrap();
    if let Effect::DeltaAuc(d) = dl.effect {
        println!("DeLong: delta {d:+.4}, z {:.3}, p {:.4}", dl.statistic, dl.p_value);
    }

    let ca: Vec<u8> = pa.iter().map(|&p| u8::from(p >= 0.5)).collect();
    let cb: Vec<u8> = pb.iter().map(|&p| u8::from(p >= 0.5)).collect();
    let mc = mcnemar_test(&ca, &cb, &yte).unwrap();
    if let Effect::Discordant { b, c } = mc.effect {
        println!(
            "McNemar: only-first-right {b}, only-second-right {c}, statistic {:.3}, p {:.4}",
            mc.statistic, mc.p_value
        );
    }

    // identical predictions: nothing to test, p = 1
    let null = mcnemar_test(&ca, &ca, &yte).unwrap();
    println!("model vs itself: p = {}", null.p_value);
}
