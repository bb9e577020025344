//! SMOTE on a training fold: synthetic minority rows are interpolated
//! between real minority neighbors until the classes balance.

use tabrisk::smote::{smote_oversample, SmoteConfig};
use tabrisk::synth::two_gaussians;

fn main() {
    let (x, mut y) = two_gaussians(2000, 4, 1.0, 7);
    // thin the positives to fake a 1:6 imbalance
    let mut kept = 0;
    for yi in y.iter_mut() {
        if *yi == 1 {
            kept += 1;
            if kept % 3 != 0 {
                *yi = 0;
            }
        }
    }
    let pos = y.iter().filter(|&&v| v == 1).count();
    println!("before: {} rows, {pos} positive", x.n_rows());

    let cfg = SmoteConfig { k_neighbors: 5, target_ratio: 1.0, seed: 1 };
    let (bx, by) = smote_oversample(&x, &y, &cfg).unwrap();
    let pos_after = by.iter().filter(|&&v| v == 1).count();
    println!("after:  {} rows, {pos_after} positive", bx.n_rows());
    assert_eq!(pos_after * 2, bx.n_rows());

    // each synthetic row sits on a segment between two minority parents,
    // so every coordinate stays inside the minority envelope
    let first_synth = x.n_rows();
    let mins: Vec<f64> = (0..x.n_cols())
        .map(|j| (0..x.n_rows()).filter(|&i| y[i] == 1).map(|i| x.get(i, j)).fold(f64::MAX, f64::min))
        .collect();
    let maxs: Vec<f64> = (0..x.n_cols())
        .map(|j| (0..x.n_rows()).filter(|&i| y[i] == 1).map(|i| x.get(i, j)).fold(f64::MIN, f64::max))
        .collect();
    for i in first_synth..bx.n_rows() {
        for j in 0..bx.n_cols() {
            assert!(bx.get(i, j) >= mins[j] && bx.get(i, j) <= maxs[j]);
        }
    }
    println!("all {} synthetic rows lie inside the minority envelope", bx.n_rows() - first_synth);

    let (bx2, _) = smote_oversample(&x, &y, &cfg).unwrap();
    assert_eq!(bx2, bx);
    println!("seed 1 reproduces the oversample bit for bit");
}
