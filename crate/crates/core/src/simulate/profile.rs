use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Monotone piecewise-linear map of `[0,100]` onto itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct DistTransform {
    knots: Vec<(f64, f64)>,
}

impl DistTransform {
    pub fn identity() -> Self {
        DistTransform {
            knots: vec![(0.0, 0.0), (100.0, 100.0)],
        }
    }

    /// Knots must be strictly increasing in both coordinates and start at
    /// `(0,0)` and end at `(100,100)`.
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::Config("distribution transform needs at least two knots".into()));
        }
        if knots[0] != (0.0, 0.0) || *knots.last().unwrap() != (100.0, 100.0) {
            return Err(Error::Config("distribution transform must map 0 to 0 and 100 to 100".into()));
        }
        if knots.windows(2).any(|w| !(w[1].0 > w[0].0 && w[1].1 > w[0].1)) {
            return Err(Error::Config("distribution transform knots must be strictly increasing".into()));
        }
        Ok(DistTransform { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    /// Evaluates at `x`, clamped to `[0,100]`.
    pub fn apply(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 100.0);
        let seg = self.knots.partition_point(|k| k.0 < x);
        if seg < self.knots.len() && self.knots[seg].0 == x {
            return self.knots[seg].1;
        }
        let (x0, y0) = self.knots[seg - 1];
        let (x1, y1) = self.knots[seg];
        y0 + (x - x0) * ((y1 - y0) / (x1 - x0))
    }
}

impl TryFrom<Vec<[f64; 2]>> for DistTransform {
    type Error = Error;
    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        DistTransform::new(v.into_iter().map(|[a, b]| (a, b)).collect())
    }
}

impl From<DistTransform> for Vec<[f64; 2]> {
    fn from(t: DistTransform) -> Self {
        t.knots.into_iter().map(|(a, b)| [a, b]).collect()
    }
}

/// One reader's scoring behaviour: attribute weighting, scale calibration
/// and random error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReaderProfile {
    pub reader_id: String,
    pub dist_transform: DistTransform,
    /// Normalized to sum to one.
    pub attribute_weights: Vec<f64>,
    pub noise_sd: f64,
}

/// Equal weights `1/q`.
pub fn uniform_weights(q: usize) -> Vec<f64> {
    vec![1.0 / q as f64; q]
}

/// `Σ w_k a_k`, accumulated in index order.
pub fn weighted_attribute(weights: &[f64], latent: &[f64]) -> f64 {
    weights.iter().zip(latent).fold(0.0, |acc, (w, a)| acc + w * a)
}

impl ReaderProfile {
    pub fn new(reader_id: impl Into<String>, dist_transform: DistTransform, attribute_weights: Vec<f64>, noise_sd: f64) -> Result<Self> {
        let reader_id = reader_id.into();
        if attribute_weights.is_empty() || attribute_weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Config(format!("reader {reader_id}: attribute weights must be nonnegative")));
        }
        let total: f64 = attribute_weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Config(format!("reader {reader_id}: attribute weights sum to zero")));
        }
        if !(noise_sd.is_finite() && noise_sd >= 0.0) {
            return Err(Error::Config(format!("reader {reader_id}: noise_sd must be >= 0")));
        }
        let attribute_weights = if total == 1.0 {
            attribute_weights
        } else {
            attribute_weights.iter().map(|w| w / total).collect()
        };
        Ok(ReaderProfile {
            reader_id,
            dist_transform,
            attribute_weights,
            noise_sd,
        })
    }

    /// Identity transform, equal weights, no noise.
    pub fn ideal(reader_id: impl Into<String>, q: usize) -> Self {
        ReaderProfile {
            reader_id: reader_id.into(),
            dist_transform: DistTransform::identity(),
            attribute_weights: uniform_weights(q),
            noise_sd: 0.0,
        }
    }

    /// Score before noise: the transformed weighted attribute percentage.
    pub fn expected_score(&self, latent: &[f64]) -> f64 {
        self.dist_transform
            .apply(100.0 * weighted_attribute(&self.attribute_weights, latent))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn knot_evaluation() {
        let t = DistTransform::new(vec![(0.0, 0.0), (40.0, 60.0), (100.0, 100.0)]).unwrap();
        assert_eq!(t.apply(40.0), 60.0);
        assert_eq!(t.apply(20.0), 30.0);
        assert_eq!(t.apply(70.0), 80.0);
        assert_eq!(t.apply(-5.0), 0.0);
        assert_eq!(t.apply(150.0), 100.0);
        assert_eq!(DistTransform::identity().apply(37.123), 37.123);
    }

    #[test]
    fn invalid_transforms() {
        assert!(DistTransform::new(vec![(0.0, 0.0), (100.0, 90.0)]).is_err());
        assert!(DistTransform::new(vec![(0.0, 0.0), (50.0, 50.0), (50.0, 60.0), (100.0, 100.0)]).is_err());
        assert!(DistTransform::new(vec![(0.0, 0.0), (50.0, 70.0), (60.0, 65.0), (100.0, 100.0)]).is_err());
    }

    #[test]
    fn weights_normalized() {
        let p = ReaderProfile::new("A", DistTransform::identity(), vec![1.0, 1.0, 2.0], 0.0).unwrap();
        assert_eq!(p.attribute_weights, vec![0.25, 0.25, 0.5]);
        assert!(ReaderProfile::new("A", DistTransform::identity(), vec![-1.0, 2.0], 0.0).is_err());
        assert!(ReaderProfile::new("A", DistTransform::identity(), vec![1.0], -1.0).is_err());
        let eq = ReaderProfile::new("A", DistTransform::identity(), vec![1.0; 3], 0.0).unwrap();
        assert_eq!(eq.attribute_weights, uniform_weights(3));
    }
}
