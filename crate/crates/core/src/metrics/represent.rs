//! Ridge mappings of a learned representation under three label
//! conventions: `Av` trains and tests on averaged labels; `Ind1` and `Ind2`
//! train one mapping per reader on that reader's scores and test against
//! the averaged labels, averaging metrics across readers (`Ind1`) or
//! pooling every prediction (`Ind2`).

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::bootstrap::{bootstrap_ci_clustered, BootstrapSettings, MetricKind, MetricResult};
use super::experiments::EvalOptions;
use super::report::Excluded;
use crate::data::{select_subset, FeatureTable, LabelMode, LabelTable, SubsetSpec};
use crate::error::{Error, Result};
use crate::ridge::{cross_val_predict_multi, Predictions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convention {
    Av,
    Ind1,
    Ind2,
}

impl Convention {
    pub const ALL: [Convention; 3] = [Convention::Av, Convention::Ind1, Convention::Ind2];
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::Av => "Av",
            Convention::Ind1 => "Ind1",
            Convention::Ind2 => "Ind2",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MappedPredictions {
    pub av: Predictions,
    /// One set per included reader, named by reader id.
    pub per_reader: Vec<Predictions>,
    pub excluded: Vec<Excluded>,
    /// Averaged label of every labelled image.
    targets: HashMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConventionRow {
    pub convention: Convention,
    pub spearman: MetricResult,
    pub rmse: MetricResult,
}

/// Cross-validated mappings of `features` for every convention. Readers
/// with fewer than `min_images` images get no mapping and are listed in
/// `excluded`.
pub fn map_representation(features: &FeatureTable, labels: &LabelTable, min_images: usize, opts: &EvalOptions) -> Result<MappedPredictions> {
    let all = select_subset(features, labels, &SubsetSpec::all(LabelMode::Averaged).with_min_images(0))?;
    let mut av = cross_val_predict_multi(&all.features, &all.targets, &opts.cv)?;
    av.subset = "Av".into();
    let targets = all
        .features
        .records()
        .iter()
        .zip(&all.targets)
        .map(|(r, t)| (r.image_id.clone(), t[0]))
        .collect();
    let mut per_reader = Vec::new();
    let mut excluded = Vec::new();
    for reader in labels.readers() {
        let spec = SubsetSpec::single(reader.clone()).with_min_images(min_images);
        match select_subset(features, labels, &spec) {
            Ok(sel) => {
                let mut p = cross_val_predict_multi(&sel.features, &sel.targets, &opts.cv)?;
                p.subset = reader.clone();
                per_reader.push(p);
            }
            Err(Error::SubsetTooSmall { subset, found, min }) => excluded.push(Excluded { subset, found, min }),
            Err(e) => return Err(e),
        }
    }
    if per_reader.is_empty() {
        return Err(Error::Invalid("no reader has enough images for an individual mapping".into()));
    }
    Ok(MappedPredictions {
        av,
        per_reader,
        excluded,
        targets,
    })
}

/// Point and half-width averaged over `results`.
pub(crate) fn mean_result(results: &[MetricResult]) -> MetricResult {
    let n = results.len() as f64;
    let point = results.iter().map(|r| r.point).sum::<f64>() / n;
    let half = results.iter().map(|r| r.half_width()).sum::<f64>() / n;
    MetricResult {
        name: results[0].name,
        point,
        ci_low: point - half,
        ci_high: point + half,
        n: results.iter().map(|r| r.n).sum(),
        repeats: results[0].repeats,
        level: results[0].level,
        redraws: results.iter().map(|r| r.redraws).sum(),
    }
}

struct Paired {
    a: Vec<f64>,
    b: Vec<f64>,
    cluster: Vec<usize>,
}

impl Paired {
    fn metrics(&self, settings: &BootstrapSettings) -> Result<(MetricResult, MetricResult)> {
        Ok((
            bootstrap_ci_clustered(MetricKind::Spearman, &self.a, &self.b, &self.cluster, settings)?,
            bootstrap_ci_clustered(MetricKind::Rmse, &self.a, &self.b, &self.cluster, settings)?,
        ))
    }
}

/// Clusters by image id so repeated images resample together.
struct Clusters(HashMap<String, usize>);

impl Clusters {
    fn id(&mut self, image: &str) -> usize {
        let next = self.0.len();
        *self.0.entry(image.to_string()).or_insert(next)
    }
}

fn rows(
    a: &[&Predictions],
    mut other: impl FnMut(usize, &str) -> Result<f64>,
    settings: &BootstrapSettings,
) -> Result<[(MetricResult, MetricResult); 3]> {
    let mut clusters = Clusters(HashMap::new());
    let mut per = Vec::new();
    let mut pooled = Paired {
        a: vec![],
        b: vec![],
        cluster: vec![],
    };
    for (set, p) in a.iter().enumerate().skip(1) {
        let mut one = Paired {
            a: vec![],
            b: vec![],
            cluster: vec![],
        };
        for (id, &v) in p.image_ids.iter().zip(&p.values) {
            let c = clusters.id(id);
            let w = other(set, id)?;
            one.a.push(v);
            one.b.push(w);
            one.cluster.push(c);
        }
        pooled.a.extend(&one.a);
        pooled.b.extend(&one.b);
        pooled.cluster.extend(&one.cluster);
        per.push(one.metrics(settings)?);
    }
    let av = a[0];
    let mut first = Paired {
        a: av.values.clone(),
        b: vec![],
        cluster: vec![],
    };
    for id in &av.image_ids {
        first.b.push(other(0, id)?);
        first.cluster.push(clusters.id(id));
    }
    let (rho1, rmse1): (Vec<_>, Vec<_>) = per.into_iter().unzip();
    Ok([
        first.metrics(settings)?,
        (mean_result(&rho1), mean_result(&rmse1)),
        pooled.metrics(settings)?,
    ])
}

fn to_rows(r: [(MetricResult, MetricResult); 3]) -> Vec<ConventionRow> {
    Convention::ALL
        .into_iter()
        .zip(r)
        .map(|(convention, (spearman, rmse))| ConventionRow {
            convention,
            spearman,
            rmse,
        })
        .collect()
}

impl MappedPredictions {
    fn sets(&self) -> Vec<&Predictions> {
        std::iter::once(&self.av).chain(&self.per_reader).collect()
    }

    /// Metrics against the averaged labels, one row per convention.
    pub fn metrics(&self, settings: &BootstrapSettings) -> Result<Vec<ConventionRow>> {
        let target = |_: usize, id: &str| Ok(self.targets[id]);
        rows(&self.sets(), target, settings).map(to_rows)
    }

    /// Agreement between two mappings of the same images and readers, one
    /// row per convention.
    pub fn similarity(&self, other: &MappedPredictions, settings: &BootstrapSettings) -> Result<Vec<ConventionRow>> {
        let mine = self.sets();
        let theirs = other.sets();
        if mine.len() != theirs.len() || mine.iter().zip(&theirs).any(|(a, b)| a.subset != b.subset || a.len() != b.len()) {
            return Err(Error::Invalid("mapped predictions cover different readers or images".into()));
        }
        let lookup: Vec<HashMap<&str, f64>> = theirs
            .iter()
            .map(|p| p.image_ids.iter().map(String::as_str).zip(p.values.iter().copied()).collect())
            .collect();
        let value = |set: usize, id: &str| {
            lookup[set]
                .get(id)
                .copied()
                .ok_or_else(|| Error::Invalid(format!("image {id} missing from second mapping")))
        };
        rows(&mine, value, settings).map(to_rows)
    }
}
