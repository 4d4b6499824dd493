//! Woman-grouped partitioning: train/validation/test splits and k-fold
//! cross-validation folds. All indices refer to rows of the source table.

use rand::seq::SliceRandom;

use super::table::FeatureTable;
use crate::error::{Error, Result};
use crate::seed;

/// Row indices of the three partitions, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSplit {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

/// One cross-validation fold: training rows and held-out rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub heldout: Vec<usize>,
}

fn shuffled_women(table: &FeatureTable, seed: u64) -> Vec<Vec<usize>> {
    let mut women: Vec<Vec<usize>> = table.women().into_iter().map(|(_, rows)| rows).collect();
    women.shuffle(&mut seed::rng_from(seed));
    women
}

/// Shuffles women and fills the partitions greedily, always giving the next
/// woman to the partition furthest below its target image count. The first
/// three women seed one partition each so none is empty.
pub fn grouped_split(table: &FeatureTable, fractions: (f64, f64, f64), seed: u64) -> Result<DatasetSplit> {
    let fr = [fractions.0, fractions.1, fractions.2];
    if fr.iter().any(|&f| !(f > 0.0)) || ((fr.iter().sum::<f64>()) - 1.0).abs() > 1e-9 {
        return Err(Error::Invalid(format!(
            "split fractions must be positive and sum to 1, got {fr:?}"
        )));
    }
    let women = shuffled_women(table, seed);
    if women.len() < 3 {
        return Err(Error::Invalid(format!(
            "grouped split needs at least 3 women, found {}",
            women.len()
        )));
    }
    let total = table.len() as f64;
    let targets: Vec<f64> = fr.iter().map(|f| f * total).collect();
    let mut parts: [Vec<usize>; 3] = Default::default();
    for (i, rows) in women.into_iter().enumerate() {
        let slot = if i < 3 {
            i
        } else {
            let mut best = 0;
            let mut best_deficit = f64::NEG_INFINITY;
            for (j, part) in parts.iter().enumerate() {
                let deficit = (targets[j] - part.len() as f64) / targets[j];
                if deficit > best_deficit {
                    best = j;
                    best_deficit = deficit;
                }
            }
            best
        };
        parts[slot].extend(rows);
    }
    for p in parts.iter_mut() {
        p.sort_unstable();
    }
    let [train, validation, test] = parts;
    Ok(DatasetSplit {
        train,
        validation,
        test,
    })
}

/// `k` woman-grouped folds. Women are shuffled and each goes to the fold
/// with the fewest images so far (ties to the lowest fold index).
pub fn grouped_kfold(table: &FeatureTable, k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::Invalid(format!("k-fold needs k >= 2, got {k}")));
    }
    let women = shuffled_women(table, seed);
    if women.len() < k {
        return Err(Error::Invalid(format!(
            "k = {k} exceeds the number of women ({})",
            women.len()
        )));
    }
    let mut assignment = vec![0usize; table.len()];
    let mut counts = vec![0usize; k];
    let mut women_per_fold = vec![0usize; k];
    for rows in women {
        let fold = (0..k)
            .min_by_key(|&f| (counts[f], women_per_fold[f], f))
            .expect("k >= 2");
        counts[fold] += rows.len();
        women_per_fold[fold] += 1;
        for r in rows {
            assignment[r] = fold;
        }
    }
    Ok((0..k)
        .map(|f| {
            let (heldout, train): (Vec<usize>, Vec<usize>) =
                (0..table.len()).partition(|&r| assignment[r] == f);
            Fold { train, heldout }
        })
        .collect())
}

/// Keeps whole women, in shuffled order, until at least `n_images` images
/// are retained. Rows are returned in original order. Requesting the full
/// table returns every row.
pub fn subsample_women(table: &FeatureTable, n_images: usize, seed: u64) -> Result<Vec<usize>> {
    if n_images > table.len() {
        return Err(Error::Invalid(format!(
            "requested {n_images} images but only {} available",
            table.len()
        )));
    }
    let mut keep = Vec::new();
    for rows in shuffled_women(table, seed) {
        if keep.len() >= n_images {
            break;
        }
        keep.extend(rows);
    }
    keep.sort_unstable();
    Ok(keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::table::{ImageRecord, Side, View};
    use ndarray::Array2;
    use std::collections::HashSet;

    fn cohort(women: usize, per: usize) -> FeatureTable {
        let records = (0..women)
            .flat_map(|w| (0..per).map(move |i| ImageRecord::new(format!("w{w}_{i}"), format!("w{w}"), View::CC, Side::L)))
            .collect::<Vec<_>>();
        let n = records.len();
        FeatureTable::new(records, Array2::zeros((n, 1)), false).unwrap()
    }

    fn woman_set(t: &FeatureTable, rows: &[usize]) -> HashSet<String> {
        rows.iter().map(|&r| t.records()[r].woman_id.clone()).collect()
    }

    #[test]
    fn split_fractions_and_disjointness() {
        let t = cohort(1000, 4);
        let s = grouped_split(&t, (0.8, 0.1, 0.1), 7).unwrap();
        let n = t.len() as f64;
        for (part, target) in [(&s.train, 0.8), (&s.validation, 0.1), (&s.test, 0.1)] {
            assert!((part.len() as f64 / n - target).abs() <= 0.02, "{} vs {target}", part.len());
        }
        assert_eq!(s.train.len() + s.validation.len() + s.test.len(), t.len());
        let (a, b, c) = (woman_set(&t, &s.train), woman_set(&t, &s.validation), woman_set(&t, &s.test));
        assert!(a.is_disjoint(&b) && a.is_disjoint(&c) && b.is_disjoint(&c));
        assert_eq!(s, grouped_split(&t, (0.8, 0.1, 0.1), 7).unwrap());
    }

    #[test]
    fn three_women_one_each() {
        let t = cohort(3, 4);
        let s = grouped_split(&t, (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0), 1).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (4, 4, 4));
        assert!(grouped_split(&cohort(2, 4), (0.8, 0.1, 0.1), 1).is_err());
        assert!(grouped_split(&t, (0.5, 0.5, 0.0), 1).is_err());
    }

    #[test]
    fn kfold_partitions_women() {
        let t = cohort(10, 4);
        let folds = grouped_kfold(&t, 5, 3).unwrap();
        assert_eq!(folds.len(), 5);
        let mut all = Vec::new();
        for f in &folds {
            assert_eq!(woman_set(&t, &f.heldout).len(), 2);
            assert!(woman_set(&t, &f.heldout).is_disjoint(&woman_set(&t, &f.train)));
            assert_eq!(f.heldout.len() + f.train.len(), t.len());
            all.extend(f.heldout.iter().copied());
        }
        all.sort_unstable();
        assert_eq!(all, (0..t.len()).collect::<Vec<_>>());
        assert!(grouped_kfold(&cohort(4, 1), 5, 0).is_err());
        assert!(grouped_kfold(&t, 1, 0).is_err());
    }

    #[test]
    fn subsample_full_is_identity() {
        let t = cohort(20, 4);
        assert_eq!(subsample_women(&t, t.len(), 5).unwrap(), (0..t.len()).collect::<Vec<_>>());
        let part = subsample_women(&t, 10, 5).unwrap();
        assert_eq!(part.len(), 12);
    }
}
