//! Odds ratio between the highest and lowest predicted-density quintiles
//! on a matched case-control roster.
//!
//! `cargo run --example case_control`

use std::collections::HashSet;

use readervar::casecontrol::{case_control_odds_ratio, odds_ratio_from_counts, woman_scores};
use readervar::harness::ridge_models;
use readervar::ridge::CvOptions;
use readervar::simulate::{reader_ring, simulate_case_control, simulate_cohort};

fn main() -> readervar::Result<()> {
    let r = odds_ratio_from_counts(30, 50, 10, 70);
    println!("hand table: OR {:.2} [{:.2}, {:.2}]", r.or_point, r.ci_low, r.ci_high);

    for slope in [0.0, 0.03] {
        let mut cfg = reader_ring(1500, 8);
        cfg.cancer_log_odds_slope = slope;
        let cohort = simulate_cohort(&cfg)?;
        let roster = simulate_case_control(&cohort.truth, &cfg, &HashSet::new())?;
        for p in ridge_models(&cohort.features, &cohort.labels, &CvOptions::new(5, 1.0, 8))? {
            let or = case_control_odds_ratio(&woman_scores(&p, &cohort.features), &roster)?;
            let [a, b, c, d] = or.counts;
            println!(
                "slope {slope}: {:<9} OR {:>5.2} [{:.2}, {:.2}]  top {a}/{b}, bottom {c}/{d} (cases/controls)",
                p.subset, or.or_point, or.ci_low, or.ci_high
            );
        }
    }
    Ok(())
}

#[test]
fn runs() {
    main().unwrap();
}
