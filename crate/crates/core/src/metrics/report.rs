use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::bootstrap::MetricResult;
use crate::data;
use crate::error::{Error, Result};
use crate::ridge::Predictions;

/// Which label convention was used for training or testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LabelKind {
    Av,
    Ind,
}

impl fmt::Display for LabelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LabelKind::Av => "Av",
            LabelKind::Ind => "Ind",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub train: LabelKind,
    pub test: LabelKind,
    pub subset: String,
    pub rmse: MetricResult,
    pub spearman: MetricResult,
}

impl Cell {
    pub fn label(&self) -> String {
        format!("{}-{}:{}", self.train, self.test, self.subset)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Excluded {
    pub subset: String,
    pub found: usize,
    pub min: usize,
}

/// Metric cells plus aggregate rows, with the settings that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct EvalReport {
    pub cells: Vec<Cell>,
    /// `Av1` and `Av2` rows, when the report covers several subsets.
    pub aggregates: Vec<Cell>,
    pub excluded: Vec<Excluded>,
    pub lambda2: f64,
    pub k: usize,
    pub seed: u64,
    pub standardized: bool,
    #[serde(skip)]
    pub predictions: Vec<Predictions>,
}

impl EvalReport {
    pub fn cell(&self, train: LabelKind, test: LabelKind, subset: &str) -> Option<&Cell> {
        self.cells
            .iter()
            .find(|c| c.train == train && c.test == test && c.subset == subset)
    }

    pub fn aggregate(&self, name: &str) -> Option<&Cell> {
        self.aggregates.iter().find(|c| c.subset == name)
    }

    pub fn merge(&mut self, other: EvalReport) {
        self.cells.extend(other.cells);
        self.aggregates.extend(other.aggregates);
        self.excluded.extend(other.excluded);
        self.predictions.extend(other.predictions);
    }

    /// Rows of `cell,metric,point,ci_low,ci_high,n,seed,lambda2`.
    pub fn write_csv(&self, path: impl AsRef<Path>, provenance: Option<&str>) -> Result<()> {
        let path = path.as_ref();
        let mut out = data::create(path)?;
        let io = |e| Error::io(path, e);
        data::write_provenance(&mut out, path, provenance)?;
        writeln!(out, "cell,metric,point,ci_low,ci_high,n,seed,lambda2").map_err(io)?;
        for c in self.cells.iter().chain(&self.aggregates) {
            for m in [&c.spearman, &c.rmse] {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    c.label(),
                    m.name,
                    m.point,
                    m.ci_low,
                    m.ci_high,
                    m.n,
                    self.seed,
                    self.lambda2
                )
                .map_err(io)?;
            }
        }
        for e in &self.excluded {
            writeln!(out, "# excluded {} ({} images < {})", e.subset, e.found, e.min).map_err(io)?;
        }
        out.flush().map_err(io)
    }

    pub fn write_json(&self, path: impl AsRef<Path>, provenance: Option<&str>) -> Result<()> {
        let path = path.as_ref();
        let mut out = data::create(path)?;
        let io = |e| Error::io(path, e);
        let value = serde_json::json!({
            "provenance": provenance,
            "report": self,
        });
        serde_json::to_writer_pretty(&mut out, &value).map_err(|e| Error::Invalid(e.to_string()))?;
        writeln!(out).map_err(io)?;
        out.flush().map_err(io)
    }
}
