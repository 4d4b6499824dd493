use std::cmp::Ordering;

use crate::error::{Error, Result};

fn check_lengths(pred: &[f64], target: &[f64], min: usize) -> Result<()> {
    if pred.len() != target.len() {
        return Err(Error::Dimension(format!(
            "{} predictions but {} targets",
            pred.len(),
            target.len()
        )));
    }
    if pred.len() < min {
        return Err(Error::Invalid(format!("need at least {min} pairs, got {}", pred.len())));
    }
    Ok(())
}

/// Root mean squared error.
pub fn rmse(pred: &[f64], target: &[f64]) -> Result<f64> {
    check_lengths(pred, target, 1)?;
    let sse: f64 = pred.iter().zip(target).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok((sse / pred.len() as f64).sqrt())
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j (0-based) share rank mean(i+1..=j)
        let rank = (i + j + 1) as f64 / 2.0;
        for &o in &order[i..j] {
            ranks[o] = rank;
        }
        i = j;
    }
    ranks
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_lengths(x, y, 2)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantInput);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation: Pearson correlation of average ranks.
pub fn spearman(pred: &[f64], target: &[f64]) -> Result<f64> {
    check_lengths(pred, target, 2)?;
    if pred.iter().chain(target).any(|v| !v.is_finite()) {
        return Err(Error::Invalid("rank correlation of non-finite values".into()));
    }
    pearson(&average_ranks(pred), &average_ranks(target))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_with_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 30.0]), vec![1.5, 3.0, 1.5, 4.0]);
        assert_eq!(average_ranks(&[]), Vec::<f64>::new());
    }

    #[test]
    fn rmse_cases() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(rmse(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 12.5f64.sqrt());
        assert!(rmse(&[], &[]).is_err());
        assert!(rmse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn spearman_cases() {
        assert_eq!(spearman(&[1., 2., 3., 4., 5.], &[1., 3., 2., 5., 4.]).unwrap(), 0.8);
        assert_eq!(spearman(&[1., 2., 3.], &[4., 5., 9.]).unwrap(), 1.0);
        assert_eq!(spearman(&[1., 2., 3.], &[9., 5., 4.]).unwrap(), -1.0);
        assert!(matches!(spearman(&[1., 1., 1.], &[1., 2., 3.]), Err(Error::ConstantInput)));
        assert!(spearman(&[1.], &[1.]).is_err());
    }
}
