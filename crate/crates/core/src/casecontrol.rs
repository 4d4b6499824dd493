//! Density quintiles on a matched case-control roster and the odds ratio
//! between the highest and lowest quintile.
//!
//! Quintile cut points are the 20/40/60/80% quantiles (linear
//! interpolation) of the control scores; a score equal to a cut point goes
//! to the lower quintile. The interval is Woolf's log-OR normal
//! approximation, with 0.5 added to every cell when any cell is zero.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::Path;

use crate::data::{self, FeatureTable};
use crate::error::{Error, Result};
use crate::metrics::quantile_sorted;
use crate::ridge::Predictions;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RosterEntry {
    pub woman_id: String,
    pub case: bool,
    pub match_group: usize,
}

/// Cases with their matched controls.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Roster {
    entries: Vec<RosterEntry>,
}

impl Roster {
    pub fn new(entries: Vec<RosterEntry>) -> Self {
        Roster { entries }
    }

    pub fn entries(&self) -> &[RosterEntry] {
        &self.entries
    }

    /// Every match group must hold exactly one case and at least one
    /// control; a woman may appear only once.
    pub fn validate(&self) -> Result<()> {
        let mut groups: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        let mut seen = std::collections::HashSet::new();
        for e in &self.entries {
            if !seen.insert(e.woman_id.as_str()) {
                return Err(Error::CaseControl(format!("woman {} appears twice in the roster", e.woman_id)));
            }
            let g = groups.entry(e.match_group).or_default();
            if e.case {
                g.0 += 1;
            } else {
                g.1 += 1;
            }
        }
        for (group, (cases, controls)) in groups {
            if cases != 1 {
                return Err(Error::CaseControl(format!("match_group {group} has {cases} cases, expected 1")));
            }
            if controls == 0 {
                return Err(Error::CaseControl(format!("match_group {group} has no controls")));
            }
        }
        Ok(())
    }

    /// `woman_id,status,match_group` with status 1 for cases.
    pub fn write_csv(&self, path: impl AsRef<Path>, provenance: Option<&str>) -> Result<()> {
        let path = path.as_ref();
        let mut out = data::create(path)?;
        let io = |e| Error::io(path, e);
        data::write_provenance(&mut out, path, provenance)?;
        writeln!(out, "woman_id,status,match_group").map_err(io)?;
        for e in &self.entries {
            writeln!(out, "{},{},{}", e.woman_id, u8::from(e.case), e.match_group).map_err(io)?;
        }
        out.flush().map_err(io)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Roster> {
        let path = path.as_ref();
        let mut rdr = data::csv_reader(path)?;
        if rdr.headers()?.iter().collect::<Vec<_>>() != ["woman_id", "status", "match_group"] {
            return Err(Error::Header {
                path: path.to_path_buf(),
                reason: "expected woman_id,status,match_group".into(),
            });
        }
        let mut entries = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = i + 1;
            if rec.len() != 3 {
                return Err(Error::row(path, row, "expected 3 fields"));
            }
            let case = match rec[1].trim() {
                "1" => true,
                "0" => false,
                other => return Err(Error::row(path, row, format!("status must be 0 or 1, got {other:?}"))),
            };
            let match_group = rec[2]
                .trim()
                .parse()
                .map_err(|_| Error::row(path, row, "cannot parse match_group"))?;
            entries.push(RosterEntry {
                woman_id: rec[0].to_string(),
                case,
                match_group,
            });
        }
        Ok(Roster { entries })
    }
}

/// Mean prediction over a woman's images.
pub fn woman_score(predictions: &Predictions, image_ids: &[&str]) -> Result<f64> {
    let index: HashMap<&str, f64> = predictions
        .image_ids
        .iter()
        .map(String::as_str)
        .zip(predictions.values.iter().copied())
        .collect();
    let vals: Vec<f64> = image_ids.iter().filter_map(|id| index.get(id).copied()).collect();
    if vals.is_empty() {
        return Err(Error::CaseControl("no predictions for woman".into()));
    }
    Ok(vals.iter().sum::<f64>() / vals.len() as f64)
}

/// Mean prediction per woman, using the feature table to map images to
/// women. Women without any predicted image are omitted.
pub fn woman_scores(predictions: &Predictions, features: &FeatureTable) -> BTreeMap<String, f64> {
    let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    let woman_of: HashMap<&str, &str> = features
        .records()
        .iter()
        .map(|r| (r.image_id.as_str(), r.woman_id.as_str()))
        .collect();
    for (id, v) in predictions.image_ids.iter().zip(&predictions.values) {
        if let Some(w) = woman_of.get(id.as_str()) {
            let e = acc.entry((*w).to_string()).or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
    }
    acc.into_iter().map(|(w, (s, n))| (w, s / n as f64)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuintileAssignment {
    pub boundaries: [f64; 4],
    /// Quintile 1..=5 per woman.
    pub quintile: BTreeMap<String, u8>,
}

impl QuintileAssignment {
    pub fn quintile_of(boundaries: &[f64; 4], score: f64) -> u8 {
        1 + boundaries.iter().filter(|&&b| score > b).count() as u8
    }
}

pub fn assign_quintiles(control_scores: &[f64], all_scores: &BTreeMap<String, f64>) -> Result<QuintileAssignment> {
    if control_scores.len() < 5 {
        return Err(Error::CaseControl(format!(
            "quintiles need at least 5 controls, got {}",
            control_scores.len()
        )));
    }
    let mut sorted = control_scores.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let boundaries = [0.2, 0.4, 0.6, 0.8].map(|q| quantile_sorted(&sorted, q));
    if boundaries[0] == boundaries[3] {
        return Err(Error::CaseControl("degenerate quintile boundaries: control scores do not vary".into()));
    }
    let quintile = all_scores
        .iter()
        .map(|(w, &s)| (w.clone(), QuintileAssignment::quintile_of(&boundaries, s)))
        .collect();
    Ok(QuintileAssignment { boundaries, quintile })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OddsRatioResult {
    pub or_point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `[cases in top, controls in top, cases in bottom, controls in bottom]`.
    pub counts: [usize; 4],
    /// Whether 0.5 was added to every cell.
    pub corrected: bool,
}

/// Woolf interval for the 2×2 table `(a, b, c, d)`.
pub fn odds_ratio_from_counts(a: usize, b: usize, c: usize, d: usize) -> OddsRatioResult {
    let corrected = a == 0 || b == 0 || c == 0 || d == 0;
    let adj = if corrected { 0.5 } else { 0.0 };
    let [fa, fb, fc, fd] = [a, b, c, d].map(|v| v as f64 + adj);
    let or = (fa / fb) / (fc / fd);
    let se = (1.0 / fa + 1.0 / fb + 1.0 / fc + 1.0 / fd).sqrt();
    OddsRatioResult {
        or_point: or,
        ci_low: (or.ln() - 1.96 * se).exp(),
        ci_high: (or.ln() + 1.96 * se).exp(),
        counts: [a, b, c, d],
        corrected,
    }
}

/// Odds ratio of the top versus bottom quintile among roster women.
pub fn odds_ratio_top_bottom(assign: &QuintileAssignment, roster: &Roster) -> Result<OddsRatioResult> {
    let [mut a, mut b, mut c, mut d] = [0usize; 4];
    for e in roster.entries() {
        match (assign.quintile.get(&e.woman_id), e.case) {
            (Some(5), true) => a += 1,
            (Some(5), false) => b += 1,
            (Some(1), true) => c += 1,
            (Some(1), false) => d += 1,
            _ => {}
        }
    }
    if a + b == 0 {
        return Err(Error::CaseControl("top quintile is empty".into()));
    }
    if c + d == 0 {
        return Err(Error::CaseControl("bottom quintile is empty".into()));
    }
    Ok(odds_ratio_from_counts(a, b, c, d))
}

/// Full pipeline for one model: woman scores, control-based quintiles,
/// odds ratio. Roster women without predictions are skipped.
pub fn case_control_odds_ratio(scores: &BTreeMap<String, f64>, roster: &Roster) -> Result<OddsRatioResult> {
    roster.validate()?;
    let mut controls = Vec::new();
    let mut roster_scores = BTreeMap::new();
    for e in roster.entries() {
        if let Some(&s) = scores.get(&e.woman_id) {
            if !e.case {
                controls.push(s);
            }
            roster_scores.insert(e.woman_id.clone(), s);
        }
    }
    let assign = assign_quintiles(&controls, &roster_scores)?;
    odds_ratio_top_bottom(&assign, roster)
}
