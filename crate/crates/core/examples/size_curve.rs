//! RMSE as the number of training images grows, subsampling whole women.
//!
//! `cargo run --example size_curve`

use readervar::data::{select_subset, LabelMode, SubsetSpec};
use readervar::metrics::{size_curve, EvalOptions};
use readervar::simulate::{reader_ring, simulate_cohort};

fn main() -> readervar::Result<()> {
    let cohort = simulate_cohort(&reader_ring(1000, 4))?;
    let all = select_subset(&cohort.features, &cohort.labels, &SubsetSpec::all(LabelMode::Averaged).with_min_images(0))?;
    let curve = size_curve(&all.features, &all.averaged(), &[250, 500, 1000, 2000, 4000], &EvalOptions::new(1.0, 5, 4).with_repeats(200))?;
    for (size, r) in curve {
        println!("{size:>5} images: rmse {:.3} [{:.3}, {:.3}]", r.point, r.ci_low, r.ci_high);
    }
    Ok(())
}

#[test]
fn runs() {
    main().unwrap();
}
