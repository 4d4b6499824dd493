//! Untrained, single-predictor and multi-predictor encoders compared by
//! how well a ridge mapping of their representations predicts density.
//!
//! `cargo run --release --example representation_compare`

use readervar::harness::{compare_representations, CompareSettings, NetSettings};
use readervar::simulate::{reader_ring, simulate_cohort};

fn main() -> readervar::Result<()> {
    let cohort = simulate_cohort(&reader_ring(1500, 6))?;
    let net = NetSettings {
        learning_rate: 3e-3,
        max_epochs: 30,
        ..NetSettings::default()
    };
    let cmp = CompareSettings {
        repeats: 200,
        ..CompareSettings::default()
    };
    let c = compare_representations(&cohort.features, &cohort.labels, &net, &cmp, 6)?;
    println!("labels  model    spearman [95% ci]          rmse");
    for (model, r) in &c.metrics {
        println!(
            "{:<6}  {model:<7}  {:.3} [{:.3}, {:.3}]   {:.2}",
            r.convention.to_string(),
            r.spearman.point,
            r.spearman.ci_low,
            r.spearman.ci_high,
            r.rmse.point
        );
    }
    for (pair, r) in &c.similarity {
        println!("{:<6}  {pair:<7}  similarity {:.4}, prediction rmse {:.3}", r.convention.to_string(), r.spearman.point, r.rmse.point);
    }
    Ok(())
}

#[test]
fn runs() {
    main().unwrap();
}
