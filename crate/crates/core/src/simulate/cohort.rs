use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Beta, Distribution, StandardNormal};
use rayon::prelude::*;

use super::config::{Embedding, SimConfig};
use super::profile::{uniform_weights, weighted_attribute, ReaderProfile};
use crate::casecontrol::{Roster, RosterEntry};
use crate::data::{self, FeatureTable, ImageRecord, LabelEntry, LabelTable, Side, View};
use crate::error::{Error, Result};
use crate::seed::{self, Rng};

const EMBEDDING_STREAM: u64 = u64::MAX;
const MATCHING_STREAM: u64 = u64::MAX - 1;

const PROJECTIONS: [(View, Side); 4] = [(View::CC, Side::R), (View::CC, Side::L), (View::MLO, Side::R), (View::MLO, Side::L)];

#[derive(Debug, Clone, PartialEq)]
pub struct TruthRecord {
    pub image_id: String,
    pub woman_id: String,
    pub true_density: f64,
    pub latent: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WomanTruth {
    pub woman_id: String,
    pub cancer: bool,
    /// Mean true density over the woman's images.
    pub mean_density: f64,
}

/// Simulation ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthTable {
    pub images: Vec<TruthRecord>,
    pub women: Vec<WomanTruth>,
}

impl TruthTable {
    /// `image_id,true_density,latent0,..,latent{q-1}`.
    pub fn write_csv(&self, path: impl AsRef<Path>, provenance: Option<&str>) -> Result<()> {
        let path = path.as_ref();
        let mut out = data::create(path)?;
        let io = |e| Error::io(path, e);
        data::write_provenance(&mut out, path, provenance)?;
        let q = self.images.first().map_or(0, |r| r.latent.len());
        write!(out, "image_id,true_density").map_err(io)?;
        for k in 0..q {
            write!(out, ",latent{k}").map_err(io)?;
        }
        writeln!(out).map_err(io)?;
        for r in &self.images {
            write!(out, "{},{}", r.image_id, r.true_density).map_err(io)?;
            for v in &r.latent {
                write!(out, ",{v}").map_err(io)?;
            }
            writeln!(out).map_err(io)?;
        }
        out.flush().map_err(io)
    }
}

/// Everything one simulation run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    pub features: FeatureTable,
    pub labels: LabelTable,
    pub truth: TruthTable,
    /// `(image_id, first reader, second reader)`.
    pub pairs: Vec<(String, String, String)>,
}

/// Fixed random map from `(latent, view)` to feature space.
struct FeatureMap {
    kind: Embedding,
    first: Array2<f64>,
    first_bias: Array1<f64>,
    second: Array2<f64>,
    gain: f64,
}

impl FeatureMap {
    fn draw(cfg: &SimConfig) -> FeatureMap {
        let mut rng = seed::substream(cfg.seed, EMBEDDING_STREAM);
        let inputs = cfg.q + 1;
        let mut normal = |rows: usize, cols: usize, sd: f64| {
            Array2::from_shape_fn((rows, cols), |_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                sd * z
            })
        };
        match cfg.embedding {
            Embedding::Tanh => {
                let h = cfg.embedding_hidden;
                let first = normal(h, inputs, 1.0);
                let first_bias = normal(h, 1, 0.5).column(0).to_owned();
                let second = normal(cfg.feature_dim, h, 1.0 / (h as f64).sqrt());
                FeatureMap {
                    kind: Embedding::Tanh,
                    first,
                    first_bias,
                    second,
                    gain: cfg.embedding_gain,
                }
            }
            Embedding::Linear => FeatureMap {
                kind: Embedding::Linear,
                first: Array2::zeros((0, inputs)),
                first_bias: Array1::zeros(0),
                second: normal(cfg.feature_dim, inputs, 1.0),
                gain: 1.0,
            },
        }
    }

    fn apply(&self, latent: &[f64], view: View) -> Array1<f64> {
        let mut u: Vec<f64> = latent.iter().map(|v| v - 0.5).collect();
        u.push(if view == View::MLO { 0.5 } else { -0.5 });
        let u = Array1::from(u);
        match self.kind {
            Embedding::Tanh => {
                let h = (self.first.dot(&u) * self.gain + &self.first_bias).mapv(f64::tanh);
                self.second.dot(&h)
            }
            Embedding::Linear => self.second.dot(&u),
        }
    }
}

/// `clip(T(100·⟨w, latent⟩) + ε)` with `ε ~ N(0, noise_sd²)`. The transform
/// clamps its input to `[0,100]` and the result is clipped to `[0,100]`.
/// One standard normal is always drawn so streams stay aligned whatever
/// the noise level. `true_density` is accepted for symmetry with the
/// truth record; the score depends on it only through `latent`.
pub fn reader_score(profile: &ReaderProfile, _true_density: f64, latent: &[f64], rng: &mut Rng) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    (profile.expected_score(latent) + profile.noise_sd * z).clamp(0.0, 100.0)
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

struct WomanSample {
    records: Vec<ImageRecord>,
    features: Vec<Array1<f64>>,
    labels: Vec<LabelEntry>,
    truth: Vec<TruthRecord>,
    pairs: Vec<(String, String, String)>,
    woman: WomanTruth,
}

fn simulate_woman(cfg: &SimConfig, map: &FeatureMap, pair_table: &[(usize, usize, f64)], pair_total: f64, index: usize, width: usize) -> WomanSample {
    let mut rng = seed::substream(cfg.seed, index as u64);
    let woman_id = format!("w{index:0width$}");
    let td = cfg.truth_distribution;
    let beta = Beta::new(td.alpha, td.beta).expect("validated");
    let base: f64 = beta.sample(&mut rng);

    let mut pick = rng.random::<f64>() * pair_total;
    let mut pair = (pair_table[0].0, pair_table[0].1);
    for &(i, j, w) in pair_table {
        if pick < w {
            pair = (i, j);
            break;
        }
        pick -= w;
    }
    let (ra, rb) = (&cfg.readers[pair.0], &cfg.readers[pair.1]);
    let uniform = uniform_weights(cfg.q);

    let mut s = WomanSample {
        records: vec![],
        features: vec![],
        labels: vec![],
        truth: vec![],
        pairs: vec![],
        woman: WomanTruth {
            woman_id: woman_id.clone(),
            cancer: false,
            mean_density: 0.0,
        },
    };
    for &(view, side) in PROJECTIONS.iter().take(cfg.images_per_woman) {
        let image_id = format!("{woman_id}_{side}{view}");
        let jitter: f64 = StandardNormal.sample(&mut rng);
        let frac = (base + cfg.image_jitter_sd * jitter).clamp(0.0, 1.0);
        let z: Vec<f64> = (0..cfg.q).map(|_| StandardNormal.sample(&mut rng)).collect();
        let zbar = z.iter().sum::<f64>() / cfg.q as f64;
        let latent: Vec<f64> = z.iter().map(|zk| frac + cfg.latent_spread * (zk - zbar)).collect();
        let true_density = (100.0 * weighted_attribute(&uniform, &latent)).clamp(0.0, 100.0);

        let mut f = map.apply(&latent, view);
        for v in f.iter_mut() {
            let e: f64 = StandardNormal.sample(&mut rng);
            *v += cfg.feature_noise_sd * e;
        }
        for r in [ra, rb] {
            s.labels.push(LabelEntry {
                image_id: image_id.clone(),
                reader_id: r.reader_id.clone(),
                score: reader_score(r, true_density, &latent, &mut rng),
            });
        }
        s.pairs.push((image_id.clone(), ra.reader_id.clone(), rb.reader_id.clone()));
        s.records.push(ImageRecord::new(image_id.clone(), woman_id.clone(), view, side));
        s.features.push(f);
        s.truth.push(TruthRecord {
            image_id,
            woman_id: woman_id.clone(),
            true_density,
            latent,
        });
    }
    let mean = s.truth.iter().map(|t| t.true_density).sum::<f64>() / s.truth.len() as f64;
    let p_case = logistic(cfg.cancer_intercept + cfg.cancer_log_odds_slope * mean);
    s.woman.mean_density = mean;
    s.woman.cancer = rng.random::<f64>() < p_case;
    s
}

/// Generates a cohort: each woman gets a reader pair drawn from the pairing
/// weights, and every image of hers is scored by both readers. Women are
/// simulated from independent substreams of the seed.
pub fn simulate_cohort(cfg: &SimConfig) -> Result<Cohort> {
    cfg.validate()?;
    let m = cfg.readers.len();
    let pair_table: Vec<(usize, usize, f64)> = (0..m)
        .flat_map(|i| ((i + 1)..m).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, cfg.pairing_weights[i][j]))
        .filter(|p| p.2 > 0.0)
        .collect();
    let pair_total: f64 = pair_table.iter().map(|p| p.2).sum();
    let map = FeatureMap::draw(cfg);
    let width = cfg.n_women.saturating_sub(1).to_string().len();

    let women: Vec<WomanSample> = (0..cfg.n_women)
        .into_par_iter()
        .map(|i| simulate_woman(cfg, &map, &pair_table, pair_total, i, width))
        .collect();

    let n = cfg.n_women * cfg.images_per_woman;
    let mut records = Vec::with_capacity(n);
    let mut feats = Array2::<f64>::zeros((n, cfg.feature_dim));
    let mut labels = Vec::with_capacity(2 * n);
    let mut truth = Vec::with_capacity(n);
    let mut pairs = Vec::with_capacity(n);
    let mut woman_truth = Vec::with_capacity(cfg.n_women);
    let mut row = 0;
    for w in women {
        for f in w.features {
            feats.row_mut(row).assign(&f);
            row += 1;
        }
        records.extend(w.records);
        labels.extend(w.labels);
        truth.extend(w.truth);
        pairs.extend(w.pairs);
        woman_truth.push(w.woman);
    }
    let manifest = cfg.readers.iter().map(|r| r.reader_id.clone()).collect();
    Ok(Cohort {
        features: FeatureTable::new(records, feats, false)?,
        labels: LabelTable::new(labels, Some(manifest))?,
        truth: TruthTable {
            images: truth,
            women: woman_truth,
        },
        pairs,
    })
}

/// Matches every case with `control_ratio` randomly chosen non-cases.
/// Women in `exclude` (for example a training partition) are never used.
pub fn simulate_case_control(truth: &TruthTable, cfg: &SimConfig, exclude: &HashSet<String>) -> Result<Roster> {
    let eligible = truth.women.iter().filter(|w| !exclude.contains(&w.woman_id));
    let (cases, mut controls): (Vec<&WomanTruth>, Vec<&WomanTruth>) = eligible.partition(|w| w.cancer);
    let needed = cases.len() * cfg.control_ratio;
    if controls.len() < needed {
        return Err(Error::CaseControl(format!(
            "{} cases need {needed} controls but only {} are available",
            cases.len(),
            controls.len()
        )));
    }
    controls.shuffle(&mut seed::substream(cfg.seed, MATCHING_STREAM));
    let mut entries = Vec::with_capacity(cases.len() + needed);
    let mut pool = controls.into_iter();
    for (g, case) in cases.into_iter().enumerate() {
        entries.push(RosterEntry {
            woman_id: case.woman_id.clone(),
            case: true,
            match_group: g,
        });
        for c in pool.by_ref().take(cfg.control_ratio) {
            entries.push(RosterEntry {
                woman_id: c.woman_id.clone(),
                case: false,
                match_group: g,
            });
        }
    }
    Ok(Roster::new(entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::spearman;
    use crate::simulate::profile::DistTransform;

    fn readers(n: usize, q: usize) -> Vec<ReaderProfile> {
        (0..n).map(|i| ReaderProfile::ideal(format!("R{i}"), q)).collect()
    }

    #[test]
    fn degenerate_readers_report_truth() {
        let cfg = SimConfig::new(50, readers(3, 4), 5);
        let c = simulate_cohort(&cfg).unwrap();
        let truth: std::collections::HashMap<_, _> = c.truth.images.iter().map(|t| (t.image_id.as_str(), t.true_density)).collect();
        for e in c.labels.entries() {
            assert_eq!(e.score, truth[e.image_id.as_str()]);
        }
    }

    #[test]
    fn counts() {
        let cfg = SimConfig::new(500, readers(4, 3), 1);
        let c = simulate_cohort(&cfg).unwrap();
        assert_eq!(c.features.len(), 2000);
        assert_eq!(c.labels.entries().len(), 4000);
        assert_eq!(c.features.dim(), cfg.feature_dim);
        assert_eq!(c.truth.women.len(), 500);
    }

    #[test]
    fn monotone_transforms_preserve_pair_ranks() {
        let mut rs = readers(3, 4);
        rs[1].dist_transform = DistTransform::new(vec![(0.0, 0.0), (30.0, 60.0), (100.0, 100.0)]).unwrap();
        rs[2].dist_transform = DistTransform::new(vec![(0.0, 0.0), (50.0, 20.0), (100.0, 100.0)]).unwrap();
        let c = simulate_cohort(&SimConfig::new(300, rs, 2)).unwrap();
        for (a, b) in [("R0", "R1"), ("R0", "R2"), ("R1", "R2")] {
            let (mut x, mut y) = (vec![], vec![]);
            for (img, ra, rb) in &c.pairs {
                if (ra == a && rb == b) || (ra == b && rb == a) {
                    x.push(c.labels.score(img, a).unwrap());
                    y.push(c.labels.score(img, b).unwrap());
                }
            }
            assert!(x.len() > 10);
            assert_eq!(spearman(&x, &y).unwrap(), 1.0);
        }
    }

    #[test]
    fn reader_score_plug_in() {
        let mut rng = seed::rng_from(0);
        let mut latent = vec![0.0; 3];
        latent[0] = 0.4;
        let mut p = ReaderProfile::new("A", DistTransform::identity(), vec![1.0, 0.0, 0.0], 0.0).unwrap();
        assert_eq!(reader_score(&p, 0.0, &latent, &mut rng), 40.0);
        p.dist_transform = DistTransform::new(vec![(0.0, 0.0), (40.0, 60.0), (100.0, 100.0)]).unwrap();
        assert_eq!(reader_score(&p, 0.0, &latent, &mut rng), 60.0);
    }

    #[test]
    fn case_control_matching() {
        let mut cfg = SimConfig::new(2000, readers(2, 2), 9);
        cfg.cancer_intercept = -3.0;
        let c = simulate_cohort(&cfg).unwrap();
        let r = simulate_case_control(&c.truth, &cfg, &HashSet::new()).unwrap();
        let cases = r.entries().iter().filter(|e| e.case).count();
        assert!(cases > 0);
        assert_eq!(r.entries().len(), cases * 4);
        r.validate().unwrap();

        let exclude: HashSet<String> = c.truth.women.iter().take(1000).map(|w| w.woman_id.clone()).collect();
        let r2 = simulate_case_control(&c.truth, &cfg, &exclude).unwrap();
        assert!(r2.entries().iter().all(|e| !exclude.contains(&e.woman_id)));

        cfg.cancer_intercept = 5.0;
        let c = simulate_cohort(&cfg).unwrap();
        assert!(simulate_case_control(&c.truth, &cfg, &HashSet::new()).is_err());
    }
}
