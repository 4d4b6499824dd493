//! A multi-predictor network with one output per reader, trained with the
//! masked loss: each image only teaches the heads of the readers who
//! scored it.
//!
//! `cargo run --example masked_training`

use readervar::data::grouped_split;
use readervar::net::{extract_representations, init_network, train, MaskedBatch, NetworkArch, TrainConfig};
use readervar::simulate::{reader_ring, simulate_cohort};

fn main() -> readervar::Result<()> {
    let cohort = simulate_cohort(&reader_ring(500, 5))?;
    let split = grouped_split(&cohort.features, (0.8, 0.1, 0.1), 5)?;
    let tr = MaskedBatch::per_reader(&cohort.features, &cohort.labels, &split.train)?;
    let va = MaskedBatch::per_reader(&cohort.features, &cohort.labels, &split.validation)?;
    println!("{} training images, {} of {} label slots known", tr.len(), tr.known(), tr.len() * cohort.labels.reader_count());

    let arch = NetworkArch::new(cohort.features.dim(), vec![32, 16], cohort.labels.reader_count());
    let cfg = TrainConfig {
        learning_rate: 3e-3,
        max_epochs: 40,
        seed: 5,
        ..TrainConfig::default()
    };
    let fitted = train(init_network(&arch, 5)?, &tr, &va, &cfg)?;
    for e in fitted.log.iter().step_by(10) {
        println!("epoch {:>3}: train loss {:>8.2}  val rmse {:.3}", e.epoch, e.train_loss, e.val_rmse);
    }
    println!(
        "best epoch {} with val rmse {:.3} (untrained {:.3})",
        fitted.best_epoch, fitted.best_val_rmse, fitted.initial_val_rmse
    );
    let reps = extract_representations(&fitted.network, &cohort.features)?;
    println!("representation: {} images x {} dims", reps.len(), reps.dim());
    Ok(())
}

#[test]
fn runs() {
    main().unwrap();
}
