use serde::{Deserialize, Serialize};

use super::dist::Dist;
use crate::error::{Error, Result};

/// Per-letter source law, distortion measure and excess-distortion threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub p_s: Dist,
    pub d_mat: Vec<Vec<f64>>,
    pub d_max: f64,
}

impl SourceSpec {
    pub fn new(p_s: Dist, d_mat: Vec<Vec<f64>>, d_max: f64) -> Result<Self> {
        let a = p_s.len();
        if d_mat.len() != a {
            return Err(Error::Dimension(format!("d_mat has {} rows, source has {a} letters", d_mat.len())));
        }
        for (i, row) in d_mat.iter().enumerate() {
            if row.len() != a {
                return Err(Error::Dimension(format!("d_mat[{i}] has {} entries, expected {a}", row.len())));
            }
            if let Some((j, v)) = row.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
                return Err(Error::Parameter(format!("d_mat[{i}][{j}] = {v} must be finite and nonnegative")));
            }
        }
        if !d_max.is_finite() || d_max < 0.0 {
            return Err(Error::Parameter(format!("d_max = {d_max} must be finite and nonnegative")));
        }
        Ok(Self { p_s, d_mat, d_max })
    }

    /// Hamming distortion over `p_s`'s alphabet.
    pub fn hamming(p_s: Dist, d_max: f64) -> Self {
        let a = p_s.len();
        let d_mat = (0..a)
            .map(|i| (0..a).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
            .collect();
        Self::new(p_s, d_mat, d_max).expect("hamming source is valid")
    }

    pub fn size(&self) -> usize {
        self.p_s.len()
    }

    #[inline]
    pub fn d(&self, s: usize, s_hat: usize) -> f64 {
        self.d_mat[s][s_hat]
    }

    /// Smallest achievable expected distortion `Σ_s P(s) min_ŝ d(s,ŝ)`.
    pub fn d_min(&self) -> f64 {
        (0..self.size())
            .map(|s| self.p_s[s] * self.d_mat[s].iter().copied().fold(f64::INFINITY, f64::min))
            .sum()
    }

    /// Distortion of the best constant reproduction and its letter.
    pub fn best_constant(&self) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for sh in 0..self.size() {
            let d: f64 = (0..self.size()).map(|s| self.p_s[s] * self.d(s, sh)).sum();
            if d < best.0 {
                best = (d, sh);
            }
        }
        best
    }

    pub fn is_symmetric(&self) -> bool {
        let a = self.size();
        (0..a).all(|i| (0..a).all(|j| self.d_mat[i][j] == self.d_mat[j][i]))
    }
}
