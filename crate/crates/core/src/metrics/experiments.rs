//! Experiment drivers built on cross-validated ridge predictions: the
//! train/test label matrix, reader subset runs with their aggregates, data
//! size curves and prediction similarity.

use std::collections::{BTreeMap, HashMap};

use super::bootstrap::{bootstrap_ci_clustered, BootstrapSettings, MetricKind, MetricResult};
use super::report::{Cell, EvalReport, Excluded, LabelKind};
use super::represent::mean_result;
use crate::data::{select_subset, subsample_women, FeatureTable, LabelTable, SubsetKind, SubsetSpec};
use crate::error::{Error, Result};
use crate::ridge::{cross_val_predict_multi, CvOptions, Predictions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub cv: CvOptions,
    pub bootstrap: BootstrapSettings,
}

impl EvalOptions {
    /// Folds and bootstrap share one seed.
    pub fn new(lambda2: f64, k: usize, seed: u64) -> Self {
        EvalOptions {
            cv: CvOptions::new(k, lambda2, seed),
            bootstrap: BootstrapSettings::with_seed(seed),
        }
    }

    pub fn with_repeats(mut self, repeats: usize) -> Self {
        self.bootstrap.repeats = repeats;
        self
    }

    fn empty_report(&self) -> EvalReport {
        EvalReport {
            lambda2: self.cv.lambda2,
            k: self.cv.k,
            seed: self.cv.seed,
            standardized: self.cv.standardize,
            ..Default::default()
        }
    }
}

/// Paired evaluation list: predictions, targets and the resampling cluster
/// (image) of each pair.
#[derive(Debug, Clone, Default)]
struct Pairs {
    pred: Vec<f64>,
    target: Vec<f64>,
    cluster: Vec<usize>,
}

impl Pairs {
    fn push(&mut self, p: f64, t: f64, c: usize) {
        self.pred.push(p);
        self.target.push(t);
        self.cluster.push(c);
    }

    fn extend(&mut self, other: &Pairs) {
        self.pred.extend(&other.pred);
        self.target.extend(&other.target);
        self.cluster.extend(&other.cluster);
    }

    fn metrics(&self, settings: &BootstrapSettings) -> Result<(MetricResult, MetricResult)> {
        let rmse = bootstrap_ci_clustered(MetricKind::Rmse, &self.pred, &self.target, &self.cluster, settings)?;
        let rho = bootstrap_ci_clustered(MetricKind::Spearman, &self.pred, &self.target, &self.cluster, settings)?;
        Ok((rmse, rho))
    }
}

fn cell(train: LabelKind, test: LabelKind, subset: impl Into<String>, pairs: &Pairs, settings: &BootstrapSettings) -> Result<Cell> {
    let (rmse, spearman) = pairs.metrics(settings)?;
    Ok(Cell {
        train,
        test,
        subset: subset.into(),
        rmse,
        spearman,
    })
}

/// The four train/test combinations of averaged and individual labels.
/// Individual training stacks one row per (image, reader) score; individual
/// testing pairs each prediction with each of the image's scores.
pub fn eval_label_matrix(features: &FeatureTable, labels: &LabelTable, opts: &EvalOptions) -> Result<EvalReport> {
    let mut av_targets = Vec::with_capacity(features.len());
    let mut ind_targets = Vec::with_capacity(features.len());
    for rec in features.records() {
        let ls = labels.labels_for(&rec.image_id);
        if ls.len() != 2 {
            return Err(Error::Invalid(format!(
                "image {} has {} labels; the label matrix needs exactly 2",
                rec.image_id,
                ls.len()
            )));
        }
        av_targets.push(vec![labels.mean_score(&rec.image_id).expect("two labels")]);
        ind_targets.push(ls.iter().map(|e| e.score).collect::<Vec<_>>());
    }
    let mut av_pred = cross_val_predict_multi(features, &av_targets, &opts.cv)?;
    av_pred.subset = "train=Av".into();
    let mut ind_pred = cross_val_predict_multi(features, &ind_targets, &opts.cv)?;
    ind_pred.subset = "train=Ind".into();

    let test_pairs = |pred: &Predictions, test: LabelKind| {
        let mut pairs = Pairs::default();
        for (i, &p) in pred.values.iter().enumerate() {
            match test {
                LabelKind::Av => pairs.push(p, av_targets[i][0], i),
                LabelKind::Ind => {
                    for &t in &ind_targets[i] {
                        pairs.push(p, t, i);
                    }
                }
            }
        }
        pairs
    };

    let mut report = opts.empty_report();
    for (train, test) in [
        (LabelKind::Av, LabelKind::Av),
        (LabelKind::Ind, LabelKind::Ind),
        (LabelKind::Av, LabelKind::Ind),
        (LabelKind::Ind, LabelKind::Av),
    ] {
        let pred = if train == LabelKind::Av { &av_pred } else { &ind_pred };
        report.cells.push(cell(train, test, "all", &test_pairs(pred, test), &opts.bootstrap)?);
    }
    report.predictions = vec![av_pred, ind_pred];
    Ok(report)
}

fn kinds_for(spec: &SubsetSpec) -> LabelKind {
    match &spec.kind {
        SubsetKind::SingleReader { .. } => LabelKind::Ind,
        SubsetKind::ReaderPair { .. } => LabelKind::Av,
        SubsetKind::All { mode } => match mode {
            crate::data::LabelMode::Averaged => LabelKind::Av,
            crate::data::LabelMode::Individual => LabelKind::Ind,
        },
    }
}

/// One cell per subset, `Av1`/`Av2` aggregates, and an `All` cell from a
/// single model trained on the union of the included subsets and assessed
/// on the same (image, target) pairs. Subsets under their minimum size are
/// listed in `excluded`.
pub fn eval_subsets(features: &FeatureTable, labels: &LabelTable, specs: &[SubsetSpec], opts: &EvalOptions) -> Result<EvalReport> {
    let mut report = opts.empty_report();
    let index = features.index_of();
    let mut concat = Pairs::default();
    // image row -> targets contributed by the included subsets
    let mut pooled: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut pooled_order: Vec<(usize, f64)> = Vec::new();
    let mut kinds = Vec::new();

    for spec in specs {
        let sel = match select_subset(features, labels, spec) {
            Ok(s) => s,
            Err(Error::SubsetTooSmall { subset, found, min }) => {
                report.excluded.push(Excluded { subset, found, min });
                continue;
            }
            Err(e) => return Err(e),
        };
        let kind = kinds_for(spec);
        kinds.push(kind);
        let mut pred = cross_val_predict_multi(&sel.features, &sel.targets, &opts.cv)?;
        pred.subset = sel.name.clone();
        let mut pairs = Pairs::default();
        for (i, rec) in sel.features.records().iter().enumerate() {
            let row = index[rec.image_id.as_str()];
            for &t in &sel.targets[i] {
                pairs.push(pred.values[i], t, row);
                pooled.entry(row).or_default().push(t);
                pooled_order.push((row, t));
            }
        }
        report.cells.push(cell(kind, kind, sel.name.clone(), &pairs, &opts.bootstrap)?);
        concat.extend(&pairs);
        report.predictions.push(pred);
    }

    if report.cells.is_empty() {
        return Ok(report);
    }
    let kind = if kinds.iter().all(|&k| k == kinds[0]) { kinds[0] } else { LabelKind::Ind };

    let mean = |f: fn(&Cell) -> MetricResult| mean_result(&report.cells.iter().map(f).collect::<Vec<_>>());
    let av1 = Cell {
        train: kind,
        test: kind,
        subset: "Av1".into(),
        rmse: mean(|c| c.rmse),
        spearman: mean(|c| c.spearman),
    };
    let av2 = cell(kind, kind, "Av2", &concat, &opts.bootstrap)?;
    report.aggregates = vec![av1, av2];

    let rows: Vec<usize> = pooled.keys().copied().collect();
    let pooled_table = features.select_rows(&rows);
    let pooled_targets: Vec<Vec<f64>> = pooled.into_values().collect();
    let mut pooled_pred = cross_val_predict_multi(&pooled_table, &pooled_targets, &opts.cv)?;
    pooled_pred.subset = "All".into();
    let slot: HashMap<usize, usize> = rows.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let mut all_pairs = Pairs::default();
    for (row, t) in pooled_order {
        all_pairs.push(pooled_pred.values[slot[&row]], t, row);
    }
    report.cells.push(cell(kind, kind, "All", &all_pairs, &opts.bootstrap)?);
    report.predictions.push(pooled_pred);
    Ok(report)
}

/// RMSE with bootstrap interval at each requested data size. Images are
/// subsampled by whole women; the full size reproduces an unsubsampled run.
pub fn size_curve(features: &FeatureTable, target: &[f64], sizes: &[usize], opts: &EvalOptions) -> Result<Vec<(usize, MetricResult)>> {
    if target.len() != features.len() {
        return Err(Error::Dimension(format!("{} images but {} targets", features.len(), target.len())));
    }
    sizes
        .iter()
        .map(|&size| {
            let rows = subsample_women(features, size, opts.cv.seed)?;
            let sub = features.select_rows(&rows);
            let women = sub.women().len();
            if women < opts.cv.k {
                return Err(Error::Invalid(format!(
                    "size {size} keeps {women} women, fewer than k = {}",
                    opts.cv.k
                )));
            }
            let targets: Vec<Vec<f64>> = rows.iter().map(|&r| vec![target[r]]).collect();
            let pred = cross_val_predict_multi(&sub, &targets, &opts.cv)?;
            let flat: Vec<f64> = targets.iter().map(|t| t[0]).collect();
            let clusters: Vec<usize> = (0..flat.len()).collect();
            let r = bootstrap_ci_clustered(MetricKind::Rmse, &pred.values, &flat, &clusters, &opts.bootstrap)?;
            Ok((size, r))
        })
        .collect()
}

/// Agreement between two prediction sets over the same images:
/// `(spearman, rmse)`.
pub fn prediction_similarity(a: &Predictions, b: &Predictions, settings: &BootstrapSettings) -> Result<(MetricResult, MetricResult)> {
    if a.len() != b.len() {
        return Err(Error::Invalid(format!("prediction sets cover {} and {} images", a.len(), b.len())));
    }
    let index: HashMap<&str, usize> = b.image_ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let mut other = Vec::with_capacity(a.len());
    for id in &a.image_ids {
        let j = index
            .get(id.as_str())
            .ok_or_else(|| Error::Invalid(format!("image {id} missing from second prediction set")))?;
        other.push(b.values[*j]);
    }
    let clusters: Vec<usize> = (0..a.len()).collect();
    let rho = bootstrap_ci_clustered(MetricKind::Spearman, &a.values, &other, &clusters, settings)?;
    let rmse = bootstrap_ci_clustered(MetricKind::Rmse, &a.values, &other, &clusters, settings)?;
    Ok((rho, rmse))
}
