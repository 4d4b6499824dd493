//! Train on averaged or individual labels, test on either: averaged test
//! labels always look better because they carry half the reader noise.
//!
//! `cargo run --example label_matrix`

use readervar::metrics::{eval_label_matrix, EvalOptions};
use readervar::simulate::{reader_ring, simulate_cohort};

fn main() -> readervar::Result<()> {
    let cohort = simulate_cohort(&reader_ring(600, 2))?;
    let report = eval_label_matrix(&cohort.features, &cohort.labels, &EvalOptions::new(1.0, 5, 2).with_repeats(200))?;
    println!("train-test       rmse [95% ci]             spearman");
    for c in &report.cells {
        println!(
            "{:<12} {:>6.2} [{:.2}, {:.2}]   {:.3}",
            c.label(),
            c.rmse.point,
            c.rmse.ci_low,
            c.rmse.ci_high,
            c.spearman.point
        );
    }
    Ok(())
}

#[test]
fn runs() {
    main().unwrap();
}
