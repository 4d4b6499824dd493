use serde::{Deserialize, Serialize};

use super::profile::{uniform_weights, DistTransform, ReaderProfile};
use crate::error::{Error, Result};

/// How latent attributes are turned into feature vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Embedding {
    /// Random two-layer map with a tanh hidden layer.
    #[default]
    Tanh,
    /// Random affine map.
    Linear,
}

/// Beta law of the per-woman true density fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthDistribution {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for TruthDistribution {
    fn default() -> Self {
        TruthDistribution { alpha: 2.0, beta: 4.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub n_women: usize,
    pub images_per_woman: usize,
    /// Latent attribute count.
    pub q: usize,
    /// Feature dimension `p`.
    pub feature_dim: usize,
    pub embedding: Embedding,
    pub embedding_hidden: usize,
    pub embedding_gain: f64,
    pub feature_noise_sd: f64,
    /// Spread of individual attributes around the image's density fraction.
    pub latent_spread: f64,
    /// Per-image jitter of the density fraction around the woman's value.
    pub image_jitter_sd: f64,
    pub readers: Vec<ReaderProfile>,
    /// Symmetric, zero-diagonal pair frequencies.
    pub pairing_weights: Vec<Vec<f64>>,
    pub truth_distribution: TruthDistribution,
    pub cancer_intercept: f64,
    pub cancer_log_odds_slope: f64,
    pub control_ratio: usize,
    pub seed: u64,
}

impl SimConfig {
    /// Defaults around the given readers; pairs are uniformly likely.
    pub fn new(n_women: usize, readers: Vec<ReaderProfile>, seed: u64) -> Self {
        let m = readers.len();
        let q = readers.first().map_or(4, |r| r.attribute_weights.len());
        SimConfig {
            n_women,
            images_per_woman: 4,
            q,
            feature_dim: 32,
            embedding: Embedding::Tanh,
            embedding_hidden: 32,
            embedding_gain: 2.0,
            feature_noise_sd: 0.05,
            latent_spread: 0.1,
            image_jitter_sd: 0.03,
            readers,
            pairing_weights: uniform_pairing(m),
            truth_distribution: TruthDistribution::default(),
            cancer_intercept: -2.0,
            cancer_log_odds_slope: 0.0,
            control_ratio: 3,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_women == 0 {
            return bad("n_women must be positive".into());
        }
        if !(1..=4).contains(&self.images_per_woman) {
            return bad(format!("images_per_woman must be 1..=4, got {}", self.images_per_woman));
        }
        if self.q == 0 || self.feature_dim == 0 || self.embedding_hidden == 0 {
            return bad("q, feature_dim and embedding_hidden must be positive".into());
        }
        if self.readers.len() < 2 {
            return bad(format!("need at least two readers, got {}", self.readers.len()));
        }
        for r in &self.readers {
            if r.attribute_weights.len() != self.q {
                return bad(format!(
                    "reader {} has {} attribute weights, expected q = {}",
                    r.reader_id,
                    r.attribute_weights.len(),
                    self.q
                ));
            }
        }
        let mut ids: Vec<&str> = self.readers.iter().map(|r| r.reader_id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != self.readers.len() {
            return bad("reader ids must be unique".into());
        }
        let m = self.readers.len();
        let w = &self.pairing_weights;
        if w.len() != m || w.iter().any(|row| row.len() != m) {
            return bad(format!("pairing_weights must be {m}x{m}"));
        }
        for i in 0..m {
            if w[i][i] != 0.0 {
                return bad("pairing_weights diagonal must be zero".into());
            }
            for j in 0..m {
                if !(w[i][j] >= 0.0 && w[i][j].is_finite()) || w[i][j] != w[j][i] {
                    return bad("pairing_weights must be symmetric, finite and nonnegative".into());
                }
            }
        }
        if w.iter().flatten().all(|&v| v == 0.0) {
            return bad("all pairing weights are zero".into());
        }
        let td = self.truth_distribution;
        if !(td.alpha > 0.0 && td.beta > 0.0) {
            return bad("truth distribution parameters must be positive".into());
        }
        if self.control_ratio < 1 {
            return bad("control_ratio must be >= 1".into());
        }
        for (name, v) in [
            ("feature_noise_sd", self.feature_noise_sd),
            ("latent_spread", self.latent_spread),
            ("image_jitter_sd", self.image_jitter_sd),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be >= 0"));
            }
        }
        if !(self.cancer_intercept.is_finite() && self.cancer_log_odds_slope.is_finite() && self.embedding_gain.is_finite()) {
            return bad("cancer_intercept, cancer_log_odds_slope and embedding_gain must be finite".into());
        }
        Ok(())
    }

    /// Parses the `[simulation]` table and `[[reader]]` array of a config
    /// document. `seed` falls back to `seed_override`, then to a top-level
    /// `seed` key.
    pub fn from_toml(doc: &toml::Table, seed_override: Option<u64>) -> Result<Self> {
        let sim: RawSim = match doc.get("simulation") {
            Some(v) => v.clone().try_into().map_err(|e| Error::Config(format!("[simulation]: {e}")))?,
            None => return Err(Error::Config("missing [simulation] section".into())),
        };
        let seed = seed_override
            .or(sim.seed)
            .or_else(|| doc.get("seed").and_then(|v| v.as_integer()).map(|v| v as u64))
            .ok_or_else(|| Error::Config("missing field: seed".into()))?;
        let raw_readers: Vec<RawReader> = match doc.get("reader") {
            Some(v) => v.clone().try_into().map_err(|e| Error::Config(format!("[[reader]]: {e}")))?,
            None => return Err(Error::Config("missing [[reader]] sections".into())),
        };
        let readers = raw_readers
            .into_iter()
            .map(|r| {
                let weights = r.attribute_weights.unwrap_or_else(|| uniform_weights(sim.q));
                let transform = match r.knots {
                    Some(k) => DistTransform::try_from(k)?,
                    None => DistTransform::identity(),
                };
                ReaderProfile::new(r.id, transform, weights, r.noise_sd)
            })
            .collect::<Result<Vec<_>>>()?;
        let m = readers.len();
        let cfg = SimConfig {
            n_women: sim.n_women,
            images_per_woman: sim.images_per_woman.unwrap_or(4),
            q: sim.q,
            feature_dim: sim.feature_dim,
            embedding: sim.embedding.unwrap_or_default(),
            embedding_hidden: sim.embedding_hidden.unwrap_or(sim.feature_dim),
            embedding_gain: sim.embedding_gain.unwrap_or(2.0),
            feature_noise_sd: sim.feature_noise_sd.unwrap_or(0.05),
            latent_spread: sim.latent_spread.unwrap_or(0.1),
            image_jitter_sd: sim.image_jitter_sd.unwrap_or(0.03),
            readers,
            pairing_weights: sim.pairing_weights.unwrap_or_else(|| uniform_pairing(m)),
            truth_distribution: sim.truth_distribution.unwrap_or_default(),
            cancer_intercept: sim.cancer_intercept.unwrap_or(-2.0),
            cancer_log_odds_slope: sim.cancer_log_odds_slope.unwrap_or(0.0),
            control_ratio: sim.control_ratio.unwrap_or(3),
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn uniform_pairing(m: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|i| (0..m).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
        .collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    n_women: usize,
    q: usize,
    feature_dim: usize,
    images_per_woman: Option<usize>,
    embedding: Option<Embedding>,
    embedding_hidden: Option<usize>,
    embedding_gain: Option<f64>,
    feature_noise_sd: Option<f64>,
    latent_spread: Option<f64>,
    image_jitter_sd: Option<f64>,
    pairing_weights: Option<Vec<Vec<f64>>>,
    truth_distribution: Option<TruthDistribution>,
    cancer_intercept: Option<f64>,
    cancer_log_odds_slope: Option<f64>,
    control_ratio: Option<usize>,
    seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReader {
    id: String,
    knots: Option<Vec<[f64; 2]>>,
    attribute_weights: Option<Vec<f64>>,
    #[serde(default)]
    noise_sd: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"
seed = 11

[simulation]
n_women = 10
q = 3
feature_dim = 6

[[reader]]
id = "A"
knots = [[0, 0], [40, 60], [100, 100]]
noise_sd = 4.0

[[reader]]
id = "B"
attribute_weights = [2, 1, 1]
"#;

    #[test]
    fn parses_config() {
        let doc: toml::Table = DOC.parse().unwrap();
        let cfg = SimConfig::from_toml(&doc, None).unwrap();
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.readers.len(), 2);
        assert_eq!(cfg.readers[1].attribute_weights, vec![0.5, 0.25, 0.25]);
        assert_eq!(cfg.readers[0].dist_transform.apply(40.0), 60.0);
        assert_eq!(SimConfig::from_toml(&doc, Some(3)).unwrap().seed, 3);
    }

    #[test]
    fn missing_seed_is_named() {
        let doc: toml::Table = DOC.replace("seed = 11", "").parse().unwrap();
        let err = SimConfig::from_toml(&doc, None).unwrap_err().to_string();
        assert!(err.contains("seed"), "{err}");
    }

    #[test]
    fn validation_failures() {
        let mut cfg = SimConfig::new(10, vec![ReaderProfile::ideal("A", 2), ReaderProfile::ideal("B", 2)], 0);
        assert!(cfg.validate().is_ok());
        cfg.pairing_weights = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        assert!(cfg.validate().is_err());
        cfg.pairing_weights = vec![vec![0.0, 1.0], vec![2.0, 0.0]];
        assert!(cfg.validate().is_err());
        let one = SimConfig::new(10, vec![ReaderProfile::ideal("A", 2)], 0);
        assert!(one.validate().is_err());
        let mut cr = SimConfig::new(10, vec![ReaderProfile::ideal("A", 2), ReaderProfile::ideal("B", 2)], 0);
        cr.control_ratio = 0;
        assert!(cr.validate().is_err());
    }
}
