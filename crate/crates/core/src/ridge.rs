//! Closed-form ridge mapping from feature space to a density score, and
//! woman-grouped cross-validated prediction.
//!
//! The weights solve `(XᵀX + λ₂I) w = Xᵀy`. The regularized Gram matrix is
//! factorized with a Cholesky decomposition (no explicit inverse), followed
//! by iterative refinement against the unfactorized system. The bias column
//! is penalized like every other column.

use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rayon::prelude::*;

use crate::data::{self, grouped_kfold, FeatureTable};
use crate::error::{Error, Result};

pub const DEFAULT_LAMBDA2: f64 = 1.0;
pub const DEFAULT_FOLDS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    pub w: Vec<f64>,
    pub lambda2: f64,
    pub trained_on: String,
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
struct Cholesky {
    l: Array2<f64>,
}

impl Cholesky {
    fn factor(a: &Array2<f64>) -> Option<Cholesky> {
        let n = a.nrows();
        let scale = a.diag().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let tol = scale * n as f64 * f64::EPSILON;
        let mut l = Array2::<f64>::zeros((n, n));
        for j in 0..n {
            let mut d = a[[j, j]];
            for k in 0..j {
                d -= l[[j, k]] * l[[j, k]];
            }
            if !(d > tol) {
                return None;
            }
            let djj = d.sqrt();
            l[[j, j]] = djj;
            for i in (j + 1)..n {
                let mut s = a[[i, j]];
                for k in 0..j {
                    s -= l[[i, k]] * l[[j, k]];
                }
                l[[i, j]] = s / djj;
            }
        }
        Some(Cholesky { l })
    }

    fn solve(&self, b: &Array1<f64>) -> Array1<f64> {
        let n = b.len();
        let l = &self.l;
        let mut z = b.clone();
        for i in 0..n {
            let mut s = z[i];
            for k in 0..i {
                s -= l[[i, k]] * z[k];
            }
            z[i] = s / l[[i, i]];
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in (i + 1)..n {
                s -= l[[k, i]] * z[k];
            }
            z[i] = s / l[[i, i]];
        }
        z
    }
}

/// Solves the regularized normal equations for raw design matrix `x`.
pub fn fit_ridge(x: ArrayView2<f64>, y: &[f64], lambda2: f64) -> Result<Weights> {
    if x.nrows() != y.len() {
        return Err(Error::Dimension(format!("{} rows but {} targets", x.nrows(), y.len())));
    }
    if !(lambda2 >= 0.0 && lambda2.is_finite()) {
        return Err(Error::Invalid(format!("lambda2 must be finite and >= 0, got {lambda2}")));
    }
    let p = x.ncols();
    let mut gram = x.t().dot(&x);
    for j in 0..p {
        gram[[j, j]] += lambda2;
    }
    let yv = ArrayView2::from_shape((y.len(), 1), y).expect("contiguous");
    let rhs: Array1<f64> = x.t().dot(&yv).index_axis_move(Axis(1), 0);

    let chol = Cholesky::factor(&gram).ok_or(Error::Singular { lambda2 })?;
    let mut w = chol.solve(&rhs);
    for _ in 0..3 {
        let r = &rhs - &gram.dot(&w);
        let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        w += &chol.solve(&r);
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular { lambda2 });
    }
    Ok(Weights {
        w: w.to_vec(),
        lambda2,
        trained_on: String::new(),
    })
}

/// Fits on a table that already carries its bias column.
pub fn fit_ridge_table(table: &FeatureTable, y: &[f64], lambda2: f64) -> Result<Weights> {
    if !table.has_bias() {
        return Err(Error::Invalid("ridge mapping expects a biased feature table".into()));
    }
    fit_ridge(table.features().view(), y, lambda2)
}

/// Unclipped linear predictions `X w`.
pub fn predict(weights: &Weights, x: ArrayView2<f64>) -> Result<Vec<f64>> {
    if x.ncols() != weights.w.len() {
        return Err(Error::Dimension(format!(
            "{} feature columns but {} weights",
            x.ncols(),
            weights.w.len()
        )));
    }
    let w = Array1::from(weights.w.clone());
    Ok(x.dot(&w).to_vec())
}

/// Per-image predictions with the fold each image was held out in.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub image_ids: Vec<String>,
    pub values: Vec<f64>,
    pub folds: Vec<usize>,
    pub subset: String,
}

impl Predictions {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn write_csv(&self, path: impl AsRef<Path>, provenance: Option<&str>) -> Result<()> {
        let path = path.as_ref();
        let mut out = data::create(path)?;
        let io = |e| Error::io(path, e);
        data::write_provenance(&mut out, path, provenance)?;
        writeln!(out, "image_id,prediction,fold").map_err(io)?;
        for ((id, v), f) in self.image_ids.iter().zip(&self.values).zip(&self.folds) {
            writeln!(out, "{id},{v},{f}").map_err(io)?;
        }
        out.flush().map_err(io)
    }

    pub fn load_csv(path: impl AsRef<Path>, subset: impl Into<String>) -> Result<Predictions> {
        let path = path.as_ref();
        let mut rdr = data::csv_reader(path)?;
        if rdr.headers()?.iter().collect::<Vec<_>>() != ["image_id", "prediction", "fold"] {
            return Err(Error::Header {
                path: path.to_path_buf(),
                reason: "expected image_id,prediction,fold".into(),
            });
        }
        let mut p = Predictions {
            image_ids: vec![],
            values: vec![],
            folds: vec![],
            subset: subset.into(),
        };
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let bad = |what: &str| Error::row(path, i + 1, format!("cannot parse {what}"));
            if rec.len() != 3 {
                return Err(Error::row(path, i + 1, "expected 3 fields"));
            }
            p.image_ids.push(rec[0].to_string());
            p.values.push(rec[1].trim().parse().map_err(|_| bad("prediction"))?);
            p.folds.push(rec[2].trim().parse().map_err(|_| bad("fold"))?);
        }
        Ok(p)
    }
}

/// Cross-validation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvOptions {
    pub k: usize,
    pub lambda2: f64,
    pub seed: u64,
    /// Center and scale non-bias columns using training-fold statistics.
    pub standardize: bool,
}

impl CvOptions {
    pub fn new(k: usize, lambda2: f64, seed: u64) -> Self {
        CvOptions {
            k,
            lambda2,
            seed,
            standardize: false,
        }
    }
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions::new(DEFAULT_FOLDS, DEFAULT_LAMBDA2, 0)
    }
}

/// k-fold grouped cross-validated predictions for a single target per image.
pub fn cross_val_predict(features: &FeatureTable, target: &[f64], k: usize, lambda2: f64, seed: u64) -> Result<Predictions> {
    let targets: Vec<Vec<f64>> = target.iter().map(|&t| vec![t]).collect();
    cross_val_predict_multi(features, &targets, &CvOptions::new(k, lambda2, seed))
}

/// Cross-validated predictions where an image may carry several targets;
/// training stacks one row per (image, target). A bias column is appended
/// when the table lacks one.
pub fn cross_val_predict_multi(features: &FeatureTable, targets: &[Vec<f64>], opts: &CvOptions) -> Result<Predictions> {
    if features.len() != targets.len() {
        return Err(Error::Dimension(format!(
            "{} images but {} target lists",
            features.len(),
            targets.len()
        )));
    }
    if targets.iter().any(|t| t.is_empty()) {
        return Err(Error::Invalid("every image needs at least one target".into()));
    }
    let biased;
    let table = if features.has_bias() {
        features
    } else {
        biased = features.append_bias()?;
        &biased
    };
    let folds = grouped_kfold(table, opts.k, opts.seed)?;
    let x = table.features();

    let fold_preds: Vec<Vec<(usize, f64)>> = folds
        .par_iter()
        .map(|fold| -> Result<Vec<(usize, f64)>> {
            let mut rows = Vec::new();
            let mut y = Vec::new();
            for &r in &fold.train {
                for &t in &targets[r] {
                    rows.push(r);
                    y.push(t);
                }
            }
            let mut xtr = x.select(Axis(0), &rows);
            let mut xte = x.select(Axis(0), &fold.heldout);
            if opts.standardize {
                standardize_pair(&mut xtr, &mut xte);
            }
            let w = fit_ridge(xtr.view(), &y, opts.lambda2)?;
            let pred = predict(&w, xte.view())?;
            Ok(fold.heldout.iter().copied().zip(pred).collect())
        })
        .collect::<Result<_>>()?;

    let mut values = vec![0.0; table.len()];
    let mut fold_of = vec![0usize; table.len()];
    for (f, preds) in fold_preds.into_iter().enumerate() {
        for (r, v) in preds {
            values[r] = v;
            fold_of[r] = f;
        }
    }
    Ok(Predictions {
        image_ids: table.records().iter().map(|r| r.image_id.clone()).collect(),
        values,
        folds: fold_of,
        subset: String::new(),
    })
}

/// Centers and scales every column but the last (bias) of both matrices
/// using the training matrix's statistics. Constant columns are only
/// centered.
fn standardize_pair(train: &mut Array2<f64>, test: &mut Array2<f64>) {
    let p = train.ncols().saturating_sub(1);
    let n = train.nrows().max(1) as f64;
    for j in 0..p {
        let col = train.column(j);
        let mean = col.sum() / n;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
        train.column_mut(j).mapv_inplace(|v| (v - mean) / sd);
        test.column_mut(j).mapv_inplace(|v| (v - mean) / sd);
    }
}

pub fn write_weights(weights: &Weights, path: impl AsRef<Path>, provenance: Option<&str>) -> Result<()> {
    let path = path.as_ref();
    let mut out = data::create(path)?;
    let io = |e| Error::io(path, e);
    data::write_provenance(&mut out, path, provenance)?;
    writeln!(out, "lambda2,{}", weights.lambda2).map_err(io)?;
    writeln!(out, "trained_on,{}", weights.trained_on).map_err(io)?;
    for v in &weights.w {
        writeln!(out, "{v}").map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn load_weights(path: impl AsRef<Path>) -> Result<Weights> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#')).enumerate();
    let mut header = |key: &str| -> Result<String> {
        match lines.next() {
            Some((_, l)) if l.starts_with(&format!("{key},")) => Ok(l[key.len() + 1..].to_string()),
            _ => Err(Error::Header {
                path: path.to_path_buf(),
                reason: format!("expected {key} line"),
            }),
        }
    };
    let lambda2 = header("lambda2")?
        .parse()
        .map_err(|_| Error::row(path, 1, "cannot parse lambda2"))?;
    let trained_on = header("trained_on")?;
    let w = lines
        .map(|(i, l)| l.trim().parse::<f64>().map_err(|_| Error::row(path, i + 1, "cannot parse weight")))
        .collect::<Result<_>>()?;
    Ok(Weights { w, lambda2, trained_on })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn bias_only_fit_is_the_mean() {
        let x = array![[1.0], [1.0]];
        let w = fit_ridge(x.view(), &[3.0, 5.0], 0.0).unwrap();
        assert_abs_diff_eq!(w.w[0], 4.0, epsilon = 1e-12);
        assert_eq!(predict(&w, x.view()).unwrap(), vec![4.0, 4.0]);
    }

    #[test]
    fn two_by_two_regularized_solve() {
        // (XᵀX + ½I) = [[2.5, 1], [1, 2.5]], Xᵀy = (4, 5) → w = (20/21, 34/21).
        let x = array![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let w = fit_ridge(x.view(), &[1.0, 2.0, 3.0], 0.5).unwrap();
        assert_abs_diff_eq!(w.w[0], 20.0 / 21.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.w[1], 34.0 / 21.0, epsilon = 1e-12);
    }

    #[test]
    fn heavy_regularization_shrinks() {
        let x = array![[1.0, 2.0], [3.0, -1.0], [0.5, 0.5]];
        let y = [4.0, -2.0, 7.0];
        let w = fit_ridge(x.view(), &y, 1e9).unwrap();
        let xty = x.t().dot(&Array1::from(y.to_vec()));
        let bound = xty.iter().map(|v| v * v).sum::<f64>().sqrt() / 1e9;
        assert!(w.w.iter().map(|v| v * v).sum::<f64>().sqrt() <= bound);
    }

    #[test]
    fn errors() {
        let x = array![[1.0, 1.0], [2.0, 2.0]];
        assert!(matches!(fit_ridge(x.view(), &[1.0, 2.0], 0.0), Err(Error::Singular { .. })));
        assert!(matches!(fit_ridge(x.view(), &[1.0], 0.0), Err(Error::Dimension(_))));
        let w = Weights {
            w: vec![2.0, 1.0],
            lambda2: 0.0,
            trained_on: String::new(),
        };
        assert_eq!(predict(&w, array![[3.0, 1.0]].view()).unwrap(), vec![7.0]);
        assert!(predict(&w, array![[3.0]].view()).is_err());
        let zero = Weights { w: vec![0.0; 2], ..w };
        assert_eq!(predict(&zero, x.view()).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn weights_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("w.csv");
        let w = Weights {
            w: vec![0.1, -3.25e-9, 7.0],
            lambda2: 1.5,
            trained_on: "C_D".into(),
        };
        write_weights(&w, &p, Some("seed=1")).unwrap();
        assert_eq!(load_weights(&p).unwrap(), w);
    }
}
