//! RBF-kernel SVM and repeated stratified cross validation on toy vectors.

use skelcomp::classify::{cross_validate, rbf_kernel, train_svm, EvalConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("K(0, 1; sigma=1) = {:.4}", rbf_kernel(&[0.0], &[1.0], 1.0)?);

    let xor = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
    let model = train_svm(&xor, &[0, 0, 1, 1], 1.0, 10.0)?;
    for p in &xor {
        println!("xor {p:?} -> {} (score {:+.3})", model.predict(p), model.decision(p)[0]);
    }

    // two noisy rings
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..120 {
        let t = i as f64 * 0.37;
        let r = if i % 2 == 0 { 1.0 } else { 2.0 } + 0.15 * (t * 7.0).sin();
        x.push(vec![r * t.cos(), r * t.sin()]);
        y.push(i % 2);
    }
    let report = cross_validate(&x, &y, &EvalConfig::default())?;
    println!("rings: {}", report.summary_line());
    println!("sigma picked in repeat 0: {:?}", report.chosen_sigma[0]);
    Ok(())
}
