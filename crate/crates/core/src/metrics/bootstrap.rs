//! Percentile bootstrap intervals over paired resamples.
//!
//! The resampling unit is a cluster: by default each (prediction, target)
//! pair is its own cluster; when several pairs share an image they are
//! drawn together. Repeat `r` draws from the substream
//! `seed::substream(seed, r)`, so results do not depend on scheduling.

use std::fmt;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basic::{rmse, spearman};
use crate::error::{Error, Result};
use crate::seed::{self, Rng};

pub const DEFAULT_REPEATS: usize = 1000;
pub const DEFAULT_LEVEL: f64 = 0.95;
/// Redraws allowed per repeat when a resample is degenerate.
pub const MAX_REDRAWS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Rmse,
    Spearman,
}

impl MetricKind {
    pub fn compute(self, pred: &[f64], target: &[f64]) -> Result<f64> {
        match self {
            MetricKind::Rmse => rmse(pred, target),
            MetricKind::Spearman => spearman(pred, target),
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricKind::Rmse => "rmse",
            MetricKind::Spearman => "spearman",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSettings {
    pub repeats: usize,
    pub level: f64,
    pub seed: u64,
}

impl BootstrapSettings {
    pub fn new(repeats: usize, level: f64, seed: u64) -> Self {
        BootstrapSettings { repeats, level, seed }
    }

    pub fn with_seed(seed: u64) -> Self {
        BootstrapSettings::new(DEFAULT_REPEATS, DEFAULT_LEVEL, seed)
    }

    fn validate(&self) -> Result<()> {
        if self.repeats < 100 {
            return Err(Error::Invalid(format!("bootstrap needs >= 100 repeats, got {}", self.repeats)));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Invalid(format!("confidence level must lie in (0,1), got {}", self.level)));
        }
        Ok(())
    }
}

/// A metric point estimate with its bootstrap interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub name: MetricKind,
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
    pub repeats: usize,
    pub level: f64,
    /// Degenerate resamples that were redrawn.
    pub redraws: usize,
}

impl MetricResult {
    pub fn half_width(&self) -> f64 {
        (self.ci_high - self.ci_low) / 2.0
    }

    /// True when the two intervals share no point.
    pub fn disjoint_from(&self, other: &MetricResult) -> bool {
        self.ci_high < other.ci_low || other.ci_high < self.ci_low
    }
}

/// Draws `n` indices uniformly with replacement.
pub fn resample_indices(n: usize, rng: &mut Rng) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn bootstrap_ci(metric: MetricKind, pred: &[f64], target: &[f64], settings: &BootstrapSettings) -> Result<MetricResult> {
    let clusters: Vec<usize> = (0..pred.len()).collect();
    bootstrap_ci_clustered(metric, pred, target, &clusters, settings)
}

/// Bootstrap with pairs grouped by `clusters[i]`; whole clusters are resampled.
pub fn bootstrap_ci_clustered(
    metric: MetricKind,
    pred: &[f64],
    target: &[f64],
    clusters: &[usize],
    settings: &BootstrapSettings,
) -> Result<MetricResult> {
    settings.validate()?;
    if clusters.len() != pred.len() {
        return Err(Error::Dimension(format!(
            "{} cluster ids for {} pairs",
            clusters.len(),
            pred.len()
        )));
    }
    let point = metric.compute(pred, target)?;

    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut slot = std::collections::HashMap::new();
    for (i, &c) in clusters.iter().enumerate() {
        let s = *slot.entry(c).or_insert_with(|| {
            members.push(Vec::new());
            members.len() - 1
        });
        members[s].push(i);
    }
    let nc = members.len();

    let draws: Vec<(f64, usize)> = (0..settings.repeats)
        .into_par_iter()
        .map(|r| -> Result<(f64, usize)> {
            let mut rng = seed::substream(settings.seed, r as u64);
            let mut p = Vec::with_capacity(pred.len());
            let mut t = Vec::with_capacity(pred.len());
            for attempt in 0..=MAX_REDRAWS {
                p.clear();
                t.clear();
                for c in resample_indices(nc, &mut rng) {
                    for &i in &members[c] {
                        p.push(pred[i]);
                        t.push(target[i]);
                    }
                }
                match metric.compute(&p, &t) {
                    Ok(v) => return Ok((v, attempt)),
                    Err(Error::ConstantInput) => continue,
                    Err(e) => return Err(e),
                }
            }
            Err(Error::DegenerateResamples(MAX_REDRAWS))
        })
        .collect::<Result<_>>()?;

    let redraws = draws.iter().map(|d| d.1).sum();
    let mut stats: Vec<f64> = draws.into_iter().map(|d| d.0).collect();
    stats.sort_by(|a, b| a.total_cmp(b));
    let alpha = 1.0 - settings.level;
    let lo = quantile_sorted(&stats, alpha / 2.0);
    let hi = quantile_sorted(&stats, 1.0 - alpha / 2.0);
    Ok(MetricResult {
        name: metric,
        point,
        ci_low: lo.min(point),
        ci_high: hi.max(point),
        n: pred.len(),
        repeats: settings.repeats,
        level: settings.level,
        redraws,
    })
}
