use std::fmt;

use serde::{Deserialize, Serialize};

use super::table::{FeatureTable, LabelTable, View};
use crate::error::{Error, Result};

/// Minimum subset size used by default: reader subsets with fewer images
/// are excluded from experiments.
pub const DEFAULT_MIN_IMAGES: usize = 4000;

/// How targets are formed when every image is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LabelMode {
    /// Mean of the image's known scores.
    #[default]
    Averaged,
    /// Every known score kept separately.
    Individual,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubsetKind {
    SingleReader { reader: String },
    ReaderPair { first: String, second: String },
    All { mode: LabelMode },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetSpec {
    #[serde(flatten)]
    pub kind: SubsetKind,
    #[serde(default = "default_min_images")]
    pub min_images: usize,
    /// Restrict to one view; `None` pools CC and MLO.
    #[serde(default)]
    pub view: Option<View>,
}

fn default_min_images() -> usize {
    DEFAULT_MIN_IMAGES
}

impl SubsetSpec {
    pub fn single(reader: impl Into<String>) -> Self {
        SubsetSpec {
            kind: SubsetKind::SingleReader { reader: reader.into() },
            min_images: DEFAULT_MIN_IMAGES,
            view: None,
        }
    }

    pub fn pair(first: impl Into<String>, second: impl Into<String>) -> Self {
        SubsetSpec {
            kind: SubsetKind::ReaderPair {
                first: first.into(),
                second: second.into(),
            },
            min_images: DEFAULT_MIN_IMAGES,
            view: None,
        }
    }

    pub fn all(mode: LabelMode) -> Self {
        SubsetSpec {
            kind: SubsetKind::All { mode },
            min_images: DEFAULT_MIN_IMAGES,
            view: None,
        }
    }

    pub fn with_min_images(mut self, min_images: usize) -> Self {
        self.min_images = min_images;
        self
    }

    pub fn with_view(mut self, view: View) -> Self {
        self.view = Some(view);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let SubsetKind::ReaderPair { first, second } = &self.kind {
            if first == second {
                return Err(Error::Invalid(format!("reader pair needs two distinct readers, got {first} twice")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for SubsetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SubsetKind::SingleReader { reader } => write!(f, "{reader}")?,
            SubsetKind::ReaderPair { first, second } => {
                let (a, b) = if first <= second { (first, second) } else { (second, first) };
                write!(f, "{a}_{b}")?
            }
            SubsetKind::All { mode: LabelMode::Averaged } => f.write_str("all_av")?,
            SubsetKind::All { mode: LabelMode::Individual } => f.write_str("all_ind")?,
        }
        if let Some(v) = self.view {
            write!(f, "@{v}")?;
        }
        Ok(())
    }
}

/// Images of a subset with their training targets. Each inner vector holds
/// one target for single readers, pairs and averaged labels, and every
/// known score for individual labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetSelection {
    pub name: String,
    pub features: FeatureTable,
    pub targets: Vec<Vec<f64>>,
}

impl SubsetSelection {
    /// Per-image mean target.
    pub fn averaged(&self) -> Vec<f64> {
        self.targets
            .iter()
            .map(|t| t.iter().sum::<f64>() / t.len() as f64)
            .collect()
    }
}

pub fn select_subset(features: &FeatureTable, labels: &LabelTable, spec: &SubsetSpec) -> Result<SubsetSelection> {
    spec.validate()?;
    let require = |r: &String| {
        labels
            .reader_index(r)
            .map(|_| ())
            .ok_or_else(|| Error::Invalid(format!("unknown reader {r}")))
    };
    match &spec.kind {
        SubsetKind::SingleReader { reader } => require(reader)?,
        SubsetKind::ReaderPair { first, second } => {
            require(first)?;
            require(second)?;
        }
        SubsetKind::All { .. } => {}
    }

    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for (i, rec) in features.records().iter().enumerate() {
        if spec.view.is_some_and(|v| v != rec.view) {
            continue;
        }
        let target = match &spec.kind {
            SubsetKind::SingleReader { reader } => labels.score(&rec.image_id, reader).map(|s| vec![s]),
            SubsetKind::ReaderPair { first, second } => {
                match (labels.score(&rec.image_id, first), labels.score(&rec.image_id, second)) {
                    // Sum in a fixed reader order so the pair is symmetric bit for bit.
                    (Some(a), Some(b)) => {
                        let (lo, hi) = if first <= second { (a, b) } else { (b, a) };
                        Some(vec![(lo + hi) / 2.0])
                    }
                    _ => None,
                }
            }
            SubsetKind::All { mode } => {
                let ls = labels.labels_for(&rec.image_id);
                if ls.is_empty() {
                    None
                } else {
                    let scores: Vec<f64> = ls.iter().map(|e| e.score).collect();
                    Some(match mode {
                        LabelMode::Averaged => vec![scores.iter().sum::<f64>() / scores.len() as f64],
                        LabelMode::Individual => scores,
                    })
                }
            }
        };
        if let Some(t) = target {
            rows.push(i);
            targets.push(t);
        }
    }
    if rows.len() < spec.min_images {
        return Err(Error::SubsetTooSmall {
            subset: spec.to_string(),
            found: rows.len(),
            min: spec.min_images,
        });
    }
    Ok(SubsetSelection {
        name: spec.to_string(),
        features: features.select_rows(&rows),
        targets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::table::{ImageRecord, LabelEntry, Side};
    use ndarray::Array2;

    fn fixture() -> (FeatureTable, LabelTable) {
        let recs = vec![
            ImageRecord::new("i", "w1", View::CC, Side::L),
            ImageRecord::new("j", "w1", View::MLO, Side::L),
            ImageRecord::new("k", "w2", View::CC, Side::R),
        ];
        let f = FeatureTable::new(recs, Array2::zeros((3, 2)), false).unwrap();
        let e = |i: &str, r: &str, s: f64| LabelEntry {
            image_id: i.into(),
            reader_id: r.into(),
            score: s,
        };
        let l = LabelTable::new(
            vec![e("i", "C", 20.0), e("i", "D", 30.0), e("j", "A", 50.0), e("j", "C", 10.0), e("k", "A", 70.0), e("k", "D", 5.0)],
            None,
        )
        .unwrap();
        (f, l)
    }

    #[test]
    fn pair_target_is_mean() {
        let (f, l) = fixture();
        let s = select_subset(&f, &l, &SubsetSpec::pair("C", "D").with_min_images(1)).unwrap();
        assert_eq!(s.features.records()[0].image_id, "i");
        assert_eq!(s.targets, vec![vec![25.0]]);
        let swapped = select_subset(&f, &l, &SubsetSpec::pair("D", "C").with_min_images(1)).unwrap();
        assert_eq!(s, swapped);
    }

    #[test]
    fn single_reader_projection() {
        let (f, l) = fixture();
        let s = select_subset(&f, &l, &SubsetSpec::single("A").with_min_images(1)).unwrap();
        assert_eq!(s.averaged(), vec![50.0, 70.0]);
        let cc = select_subset(&f, &l, &SubsetSpec::single("A").with_min_images(1).with_view(View::CC)).unwrap();
        assert_eq!(cc.averaged(), vec![70.0]);
    }

    #[test]
    fn all_modes() {
        let (f, l) = fixture();
        let av = select_subset(&f, &l, &SubsetSpec::all(LabelMode::Averaged).with_min_images(3)).unwrap();
        assert_eq!(av.targets, vec![vec![25.0], vec![30.0], vec![37.5]]);
        let ind = select_subset(&f, &l, &SubsetSpec::all(LabelMode::Individual).with_min_images(3)).unwrap();
        assert_eq!(ind.targets[1], vec![50.0, 10.0]);
    }

    #[test]
    fn exclusion_and_errors() {
        let (f, l) = fixture();
        let err = select_subset(&f, &l, &SubsetSpec::single("A").with_min_images(3)).unwrap_err();
        assert!(matches!(err, Error::SubsetTooSmall { found: 2, min: 3, .. }));
        assert!(select_subset(&f, &l, &SubsetSpec::single("Z").with_min_images(0)).is_err());
        assert!(select_subset(&f, &l, &SubsetSpec::pair("A", "A").with_min_images(0)).is_err());
    }
}
