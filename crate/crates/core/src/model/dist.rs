use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a distribution before it is rejected.
pub const SUM_TOL: f64 = 1e-9;

/// A probability vector over a finite alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Dist {
    probs: Vec<f64>,
}

impl Dist {
    /// Validates and renormalizes. Entries must be finite and nonnegative and
    /// the total must be within `SUM_TOL` of one.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty probability vector".into()));
        }
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDistribution(format!("entry {i} is {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
        }
        Ok(Self::normalized_unchecked(probs, total))
    }

    /// Normalizes any nonnegative vector with positive mass.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if weights.is_empty() || !(total > 0.0) || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution("weights must be nonnegative with positive mass".into()));
        }
        Ok(Self::normalized_unchecked(weights, total))
    }

    fn normalized_unchecked(mut probs: Vec<f64>, total: f64) -> Self {
        if total != 1.0 {
            for p in &mut probs {
                *p /= total;
            }
        }
        Self { probs }
    }

    pub fn uniform(size: usize) -> Self {
        assert!(size > 0);
        Self {
            probs: vec![1.0 / size as f64; size],
        }
    }

    pub fn point(size: usize, at: usize) -> Self {
        assert!(at < size);
        let mut probs = vec![0.0; size];
        probs[at] = 1.0;
        Self { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }

    pub fn min_prob(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Shannon entropy in bits.
    pub fn entropy(&self) -> f64 {
        self.probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
    }

    /// L1 distance to another distribution of the same size.
    pub fn l1(&self, other: &Dist) -> f64 {
        self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).sum()
    }

    /// Convex combination `(1 - t) self + t other`.
    pub fn mix(&self, other: &Dist, t: f64) -> Dist {
        let probs = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (1.0 - t) * a + t * b)
            .collect();
        Dist { probs }
    }
}

impl std::ops::Index<usize> for Dist {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.probs[i]
    }
}

impl TryFrom<Vec<f64>> for Dist {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Dist::new(v)
    }
}

impl From<Dist> for Vec<f64> {
    fn from(d: Dist) -> Self {
        d.probs
    }
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renormalizes_within_tolerance() {
        let d = Dist::new(vec![0.5, 0.5 + 1e-10]).unwrap();
        assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(Dist::new(vec![0.5, 0.6]).is_err());
        assert!(Dist::new(vec![1.5, -0.5]).is_err());
        assert!(Dist::new(vec![]).is_err());
    }

    #[test]
    fn entropy_of_uniform() {
        assert!((Dist::uniform(8).entropy() - 3.0).abs() < 1e-12);
        assert_eq!(Dist::point(3, 1).entropy(), 0.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
    }
}
