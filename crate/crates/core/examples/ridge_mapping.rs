//! Closed-form ridge from features to density, out-of-fold predictions,
//! and a weights round trip.
//!
//! `cargo run --example ridge_mapping`

use readervar::data::{select_subset, LabelMode, SubsetSpec};
use readervar::metrics::{rmse, spearman};
use readervar::ridge::{cross_val_predict_multi, fit_ridge_table, load_weights, predict, write_weights, CvOptions};
use readervar::simulate::{reader_ring, simulate_cohort};

fn main() -> readervar::Result<()> {
    let cohort = simulate_cohort(&reader_ring(800, 1))?;
    let sel = select_subset(&cohort.features, &cohort.labels, &SubsetSpec::all(LabelMode::Averaged).with_min_images(0))?;
    let target = sel.averaged();

    for lambda2 in [0.01, 1.0, 100.0] {
        let pred = cross_val_predict_multi(&sel.features, &sel.targets, &CvOptions::new(5, lambda2, 1))?;
        println!(
            "lambda2 {lambda2:>6}: out-of-fold rmse {:.3}, spearman {:.4}",
            rmse(&pred.values, &target)?,
            spearman(&pred.values, &target)?
        );
    }

    // a mapping on every image, saved and reloaded
    let biased = sel.features.append_bias()?;
    let w = fit_ridge_table(&biased, &target, 1.0)?;
    let path = std::env::temp_dir().join("readervar_example_weights.csv");
    write_weights(&w, &path, Some("example"))?;
    let back = load_weights(&path)?;
    let a = predict(&w, biased.features().view())?;
    let b = predict(&back, biased.features().view())?;
    assert_eq!(a, b);
    println!("in-sample rmse {:.3} with {} weights (reloaded from {})", rmse(&a, &target)?, w.w.len(), path.display());
    Ok(())
}

#[test]
fn runs() {
    main().unwrap();
}
