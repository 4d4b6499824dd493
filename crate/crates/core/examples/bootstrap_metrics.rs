//! Spearman and RMSE with bootstrap intervals, plain and clustered.
//!
//! `cargo run --example bootstrap_metrics`

use readervar::metrics::{bootstrap_ci, bootstrap_ci_clustered, spearman, BootstrapSettings, MetricKind};

fn main() -> readervar::Result<()> {
    println!("tied ranks: spearman([1,2,2,3], [1,2,3,4]) = {:.4}", spearman(&[1., 2., 2., 3.], &[1., 2., 3., 4.])?);

    let truth: Vec<f64> = (0..200).map(|i| (i as f64 * 0.37).sin() * 40.0 + 50.0).collect();
    let pred: Vec<f64> = truth.iter().enumerate().map(|(i, t)| t + ((i * 7919) % 13) as f64 - 6.0).collect();
    let settings = BootstrapSettings::new(1000, 0.95, 9);
    for kind in [MetricKind::Spearman, MetricKind::Rmse] {
        let r = bootstrap_ci(kind, &pred, &truth, &settings)?;
        println!("{:?}: {:.4} [{:.4}, {:.4}] over {} pairs", kind, r.point, r.ci_low, r.ci_high, r.n);
    }

    // each image scored twice: resample images, not scores
    let doubled_pred: Vec<f64> = pred.iter().flat_map(|&p| [p, p]).collect();
    let doubled_truth: Vec<f64> = truth.iter().flat_map(|&t| [t - 3.0, t + 3.0]).collect();
    let clusters: Vec<usize> = (0..truth.len()).flat_map(|i| [i, i]).collect();
    let r = bootstrap_ci_clustered(MetricKind::Rmse, &doubled_pred, &doubled_truth, &clusters, &settings)?;
    println!("clustered rmse: {:.4} [{:.4}, {:.4}]", r.point, r.ci_low, r.ci_high);
    Ok(())
}

#[test]
fn runs() {
    main().unwrap();
}
