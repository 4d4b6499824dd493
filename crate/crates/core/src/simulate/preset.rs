use super::config::{Embedding, SimConfig};
use super::profile::{DistTransform, ReaderProfile};

/// Midpoint shift of each reader's calibration curve.
const SHIFTS: [f64; 13] = [-18.0, 12.0, -8.0, 20.0, -14.0, 4.0, 16.0, -4.0, 10.0, -20.0, 8.0, -10.0, 14.0];

/// Thirteen readers `A`..`M`, each pairing only with its two neighbours on
/// a ring. Reader `i` over-weights attribute `i mod 4`, bends the scale
/// through `(50, 50 + shift)` and adds noise of 4 to 7 points. This is the
/// cohort of `configs/cohort.toml`.
pub fn reader_ring(n_women: usize, seed: u64) -> SimConfig {
    let readers: Vec<ReaderProfile> = SHIFTS
        .iter()
        .enumerate()
        .map(|(i, &shift)| {
            let id = char::from(b'A' + i as u8).to_string();
            let mut w = vec![1.0; 4];
            w[i % 4] = if i % 2 == 0 { 1.5 } else { 1.25 };
            let knots = DistTransform::new(vec![(0.0, 0.0), (50.0, 50.0 + shift), (100.0, 100.0)]).expect("valid knots");
            ReaderProfile::new(id, knots, w, 4.0 + (i % 4) as f64).expect("valid reader")
        })
        .collect();
    let m = readers.len();
    let mut cfg = SimConfig::new(n_women, readers, seed);
    cfg.pairing_weights = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| if (i + 1) % m == j || (j + 1) % m == i { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    cfg.feature_dim = 128;
    cfg.embedding = Embedding::Tanh;
    cfg.embedding_hidden = 128;
    cfg.cancer_intercept = -3.5;
    cfg.cancer_log_odds_slope = 0.03;
    cfg
}
