//! Simulate the thirteen-reader ring and look at how readers disagree.
//!
//! `cargo run --example simulate_cohort`

use readervar::data::SubsetSpec;
use readervar::metrics::{rmse, spearman};
use readervar::simulate::{reader_ring, simulate_case_control, simulate_cohort};

fn main() -> readervar::Result<()> {
    let cfg = reader_ring(600, 42);
    let cohort = simulate_cohort(&cfg)?;
    println!(
        "{} images of {} women, {} readers, {} features per image",
        cohort.features.len(),
        cohort.truth.women.len(),
        cohort.labels.reader_count(),
        cohort.features.dim()
    );

    let truth: std::collections::HashMap<&str, f64> = cohort.truth.images.iter().map(|t| (t.image_id.as_str(), t.true_density)).collect();
    println!("reader  images  rmse-vs-truth  spearman-vs-truth");
    for reader in cohort.labels.readers() {
        let (mut s, mut t) = (Vec::new(), Vec::new());
        for e in cohort.labels.entries().iter().filter(|e| &e.reader_id == reader) {
            s.push(e.score);
            t.push(truth[e.image_id.as_str()]);
        }
        println!("{reader:>6}  {:>6}  {:>13.2}  {:>17.3}", s.len(), rmse(&s, &t)?, spearman(&s, &t)?);
    }

    // the two readers of one image disagree by roughly the noise plus calibration gap
    let pair = readervar::data::select_subset(&cohort.features, &cohort.labels, &SubsetSpec::pair("A", "B").with_min_images(0))?;
    let gaps: Vec<f64> = pair
        .features
        .records()
        .iter()
        .map(|r| cohort.labels.score(&r.image_id, "A").unwrap() - cohort.labels.score(&r.image_id, "B").unwrap())
        .collect();
    println!("A-B on {} shared images: mean gap {:.2}", gaps.len(), gaps.iter().sum::<f64>() / gaps.len() as f64);

    let roster = simulate_case_control(&cohort.truth, &cfg, &Default::default())?;
    let cases = roster.entries().iter().filter(|e| e.case).count();
    println!("case-control roster: {cases} cases, {} controls", roster.entries().len() - cases);
    Ok(())
}

#[test]
fn runs() {
    main().unwrap();
}
