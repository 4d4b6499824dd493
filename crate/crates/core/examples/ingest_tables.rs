//! Bring your own features and labels: build the tables in memory, write
//! them as CSV, load them back and map them.
//!
//! `cargo run --example ingest_tables`

use ndarray::Array2;
use readervar::data::{load_feature_table, load_label_table, write_feature_table, write_label_table, FeatureTable, ImageRecord, LabelEntry, LabelTable, Side, View};
use readervar::metrics::{eval_label_matrix, EvalOptions};

fn main() -> readervar::Result<()> {
    let (women, dim) = (60, 6);
    let mut records = Vec::new();
    let mut labels = Vec::new();
    let mut feats = Array2::zeros((women * 2, dim));
    for w in 0..women {
        for (k, view) in [View::CC, View::MLO].into_iter().enumerate() {
            let row = w * 2 + k;
            let id = format!("w{w}_{view}");
            let density = (w as f64 * 1.7) % 90.0 + 5.0;
            for j in 0..dim {
                feats[[row, j]] = density / 50.0 * ((j + 1) as f64).sqrt() + ((row * 31 + j * 17) % 7) as f64 * 0.05;
            }
            labels.push(LabelEntry { image_id: id.clone(), reader_id: "X".into(), score: (density - 3.0).clamp(0.0, 100.0) });
            labels.push(LabelEntry { image_id: id.clone(), reader_id: "Y".into(), score: (density + 4.0).min(100.0) });
            records.push(ImageRecord::new(id, format!("w{w}"), view, Side::L));
        }
    }
    let features = FeatureTable::new(records, feats, false)?;
    let labels = LabelTable::new(labels, None)?;

    let dir = std::env::temp_dir().join("readervar_example_ingest");
    write_feature_table(&features, dir.join("features.csv"), None)?;
    write_label_table(&labels, dir.join("labels.csv"), None)?;
    let features = load_feature_table(dir.join("features.csv"))?;
    let labels = load_label_table(dir.join("labels.csv"), Some(vec!["X".into(), "Y".into()]))?;
    println!("loaded {} images, {} labels from {}", features.len(), labels.entries().len(), dir.display());

    let report = eval_label_matrix(&features, &labels, &EvalOptions::new(1.0, 5, 0).with_repeats(200))?;
    for c in &report.cells {
        println!("{:<12} rmse {:.2}", c.label(), c.rmse.point);
    }
    Ok(())
}

#[test]
fn runs() {
    main().unwrap();
}
