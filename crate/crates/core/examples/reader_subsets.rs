//! One model per reader against one pooled model on the same scores. The
//! per-reader models can follow each reader's calibration; the pooled
//! model cannot.
//!
//! `cargo run --example reader_subsets`

use readervar::data::SubsetSpec;
use readervar::metrics::{eval_subsets, EvalOptions};
use readervar::simulate::{reader_ring, simulate_cohort};

fn main() -> readervar::Result<()> {
    let cohort = simulate_cohort(&reader_ring(800, 3))?;
    let specs: Vec<SubsetSpec> = cohort
        .labels
        .readers()
        .iter()
        .map(|r| SubsetSpec::single(r.clone()).with_min_images(150))
        .chain([SubsetSpec::pair("A", "B").with_min_images(1000)])
        .collect();
    let report = eval_subsets(&cohort.features, &cohort.labels, &specs, &EvalOptions::new(1.0, 5, 3).with_repeats(200))?;
    for c in report.cells.iter().chain(&report.aggregates) {
        println!("{:<14} spearman {:.3}  rmse {:.2}  (n = {})", c.label(), c.spearman.point, c.rmse.point, c.rmse.n);
    }
    for e in &report.excluded {
        println!("excluded {}: {} images < {}", e.subset, e.found, e.min);
    }
    Ok(())
}

#[test]
fn runs() {
    main().unwrap();
}
