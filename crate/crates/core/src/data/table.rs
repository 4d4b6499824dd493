use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum View {
    CC,
    MLO,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    L,
    R,
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            View::CC => "CC",
            View::MLO => "MLO",
        })
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::L => "L",
            Side::R => "R",
        })
    }
}

impl FromStr for View {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "CC" => Ok(View::CC),
            "MLO" => Ok(View::MLO),
            other => Err(format!("unknown view {other:?}")),
        }
    }
}

impl FromStr for Side {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "L" => Ok(Side::L),
            "R" => Ok(Side::R),
            other => Err(format!("unknown side {other:?}")),
        }
    }
}

/// Identity of one mammographic projection.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ImageRecord {
    pub image_id: String,
    pub woman_id: String,
    pub view: View,
    pub side: Side,
}

impl ImageRecord {
    pub fn new(image_id: impl Into<String>, woman_id: impl Into<String>, view: View, side: Side) -> Self {
        ImageRecord {
            image_id: image_id.into(),
            woman_id: woman_id.into(),
            view,
            side,
        }
    }
}

/// Per-image feature vectors, one row per [`ImageRecord`].
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    records: Vec<ImageRecord>,
    features: Array2<f64>,
    has_bias: bool,
}

impl FeatureTable {
    /// Builds a table after checking row counts, id uniqueness, finiteness
    /// and (if `has_bias`) the trailing ones column.
    pub fn new(records: Vec<ImageRecord>, features: Array2<f64>, has_bias: bool) -> Result<Self> {
        if records.len() != features.nrows() {
            return Err(Error::Dimension(format!(
                "{} records but {} feature rows",
                records.len(),
                features.nrows()
            )));
        }
        let mut seen: HashMap<&str, &str> = HashMap::with_capacity(records.len());
        for r in &records {
            if seen.insert(&r.image_id, &r.woman_id).is_some() {
                return Err(Error::Invalid(format!("duplicate image_id {}", r.image_id)));
            }
        }
        if let Some((i, _)) = features.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Invalid(format!(
                "non-finite feature at row {}",
                i / features.ncols().max(1) + 1
            )));
        }
        if has_bias {
            if features.ncols() == 0 {
                return Err(Error::Invalid("bias table needs at least one column".into()));
            }
            if features.column(features.ncols() - 1).iter().any(|&v| v != 1.0) {
                return Err(Error::Invalid("bias column is not all ones".into()));
            }
        }
        Ok(FeatureTable {
            records,
            features,
            has_bias,
        })
    }

    pub fn records(&self) -> &[ImageRecord] {
        &self.records
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn has_bias(&self) -> bool {
        self.has_bias
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Number of feature columns, including the bias column when present.
    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    /// Appends a column of ones.
    pub fn append_bias(&self) -> Result<FeatureTable> {
        if self.has_bias {
            return Err(Error::Invalid("bias column already appended".into()));
        }
        let (n, p) = self.features.dim();
        let mut out = Array2::<f64>::ones((n, p + 1));
        out.slice_mut(ndarray::s![.., ..p]).assign(&self.features);
        Ok(FeatureTable {
            records: self.records.clone(),
            features: out,
            has_bias: true,
        })
    }

    /// Rows at `indices`, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> FeatureTable {
        FeatureTable {
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
            features: self.features.select(Axis(0), indices),
            has_bias: self.has_bias,
        }
    }

    pub fn index_of(&self) -> HashMap<&str, usize> {
        self.records
            .iter()
            .enumerate()
            .map(|(i, r)| (r.image_id.as_str(), i))
            .collect()
    }

    /// Women in order of first appearance, each with the rows of their images.
    pub fn women(&self) -> Vec<(String, Vec<usize>)> {
        let mut order: Vec<(String, Vec<usize>)> = Vec::new();
        let mut slot: HashMap<&str, usize> = HashMap::new();
        for (i, r) in self.records.iter().enumerate() {
            match slot.get(r.woman_id.as_str()) {
                Some(&s) => order[s].1.push(i),
                None => {
                    slot.insert(&r.woman_id, order.len());
                    order.push((r.woman_id.clone(), vec![i]));
                }
            }
        }
        order
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelEntry {
    pub image_id: String,
    pub reader_id: String,
    pub score: f64,
}

/// Sparse image-by-reader score matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelTable {
    entries: Vec<LabelEntry>,
    readers: Vec<String>,
    by_image: HashMap<String, Vec<usize>>,
}

impl LabelTable {
    /// Validates scores and uniqueness. Readers come from `readers` when
    /// given, otherwise in order of first appearance.
    pub fn new(entries: Vec<LabelEntry>, readers: Option<Vec<String>>) -> Result<Self> {
        let mut by_image: HashMap<String, Vec<usize>> = HashMap::new();
        let mut seen = std::collections::HashSet::new();
        let mut inferred: Vec<String> = Vec::new();
        for (i, e) in entries.iter().enumerate() {
            if !(e.score.is_finite() && (0.0..=100.0).contains(&e.score)) {
                return Err(Error::Invalid(format!(
                    "score {} for ({}, {}) outside [0,100]",
                    e.score, e.image_id, e.reader_id
                )));
            }
            if !seen.insert((e.image_id.as_str(), e.reader_id.as_str())) {
                return Err(Error::Invalid(format!(
                    "duplicate label for ({}, {})",
                    e.image_id, e.reader_id
                )));
            }
            if !inferred.contains(&e.reader_id) {
                inferred.push(e.reader_id.clone());
            }
            by_image.entry(e.image_id.clone()).or_default().push(i);
        }
        let readers = match readers {
            Some(manifest) => {
                if let Some(missing) = inferred.iter().find(|r| !manifest.contains(r)) {
                    return Err(Error::Invalid(format!("reader {missing} not in manifest")));
                }
                manifest
            }
            None => inferred,
        };
        Ok(LabelTable {
            entries,
            readers,
            by_image,
        })
    }

    pub fn entries(&self) -> &[LabelEntry] {
        &self.entries
    }

    pub fn readers(&self) -> &[String] {
        &self.readers
    }

    /// Reader count `m`.
    pub fn reader_count(&self) -> usize {
        self.readers.len()
    }

    pub fn reader_index(&self, reader_id: &str) -> Option<usize> {
        self.readers.iter().position(|r| r == reader_id)
    }

    /// Labels for one image in file order.
    pub fn labels_for(&self, image_id: &str) -> Vec<&LabelEntry> {
        self.by_image
            .get(image_id)
            .map(|ix| ix.iter().map(|&i| &self.entries[i]).collect())
            .unwrap_or_default()
    }

    pub fn score(&self, image_id: &str, reader_id: &str) -> Option<f64> {
        self.by_image.get(image_id).and_then(|ix| {
            ix.iter()
                .map(|&i| &self.entries[i])
                .find(|e| e.reader_id == reader_id)
                .map(|e| e.score)
        })
    }

    /// Mean of an image's known scores.
    pub fn mean_score(&self, image_id: &str) -> Option<f64> {
        let labels = self.labels_for(image_id);
        if labels.is_empty() {
            None
        } else {
            Some(labels.iter().map(|e| e.score).sum::<f64>() / labels.len() as f64)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn rec(i: &str, w: &str) -> ImageRecord {
        ImageRecord::new(i, w, View::CC, Side::L)
    }

    #[test]
    fn append_bias_adds_ones_column() {
        let t = FeatureTable::new(vec![rec("a", "w"), rec("b", "w")], array![[1., 2., 3.], [4., 5., 6.]], false).unwrap();
        let b = t.append_bias().unwrap();
        assert_eq!(b.dim(), 4);
        assert!(b.has_bias());
        assert_eq!(b.features().column(3).to_vec(), vec![1.0, 1.0]);
        assert_eq!(b.features().slice(ndarray::s![.., ..3]), t.features());
        assert!(b.append_bias().is_err());
    }

    #[test]
    fn append_bias_on_empty_table() {
        let t = FeatureTable::new(vec![], Array2::zeros((0, 3)), false).unwrap();
        let b = t.append_bias().unwrap();
        assert_eq!(b.len(), 0);
        assert_eq!(b.dim(), 4);
        assert!(b.has_bias());
    }

    #[test]
    fn rejects_duplicate_images_and_nan() {
        assert!(FeatureTable::new(vec![rec("a", "w"), rec("a", "w")], Array2::zeros((2, 1)), false).is_err());
        assert!(FeatureTable::new(vec![rec("a", "w")], array![[f64::NAN]], false).is_err());
    }

    #[test]
    fn label_table_checks() {
        let e = |i: &str, r: &str, s: f64| LabelEntry {
            image_id: i.into(),
            reader_id: r.into(),
            score: s,
        };
        let t = LabelTable::new(vec![e("i1", "A", 30.0), e("i1", "B", 40.0)], None).unwrap();
        assert_eq!(t.reader_count(), 2);
        assert_eq!(t.mean_score("i1"), Some(35.0));
        assert_eq!(t.score("i1", "B"), Some(40.0));
        assert!(LabelTable::new(vec![e("i1", "A", 101.0)], None).is_err());
        assert!(LabelTable::new(vec![e("i1", "A", 1.0), e("i1", "A", 2.0)], None).is_err());
        let m = LabelTable::new(vec![e("i1", "B", 1.0)], Some(vec!["A".into(), "B".into()])).unwrap();
        assert_eq!(m.readers(), &["A".to_string(), "B".to_string()]);
    }
}
