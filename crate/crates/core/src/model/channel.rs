use serde::{Deserialize, Serialize};

use super::dist::{Dist, SUM_TOL};
use crate::error::{Error, Result};

/// A single transition matrix `W(y|x)` stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub x_size: usize,
    pub y_size: usize,
    m: Vec<f64>,
}

impl Channel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let x_size = rows.len();
        if x_size == 0 {
            return Err(Error::Dimension("channel has no input rows".into()));
        }
        let y_size = rows[0].len();
        let mut m = Vec::with_capacity(x_size * y_size);
        for (x, row) in rows.into_iter().enumerate() {
            if row.len() != y_size {
                return Err(Error::Dimension(format!("row {x} has {} entries, expected {y_size}", row.len())));
            }
            let d = Dist::new(row).map_err(|e| Error::InvalidDistribution(format!("row {x}: {e}")))?;
            m.extend_from_slice(d.probs());
        }
        Ok(Self { x_size, y_size, m })
    }

    pub(crate) fn from_flat(x_size: usize, y_size: usize, m: Vec<f64>) -> Self {
        debug_assert_eq!(m.len(), x_size * y_size);
        Self { x_size, y_size, m }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.m[x * self.y_size + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.m[x * self.y_size..(x + 1) * self.y_size]
    }

    pub fn flat(&self) -> &[f64] {
        &self.m
    }

    /// Binary symmetric channel with crossover `p`.
    pub fn bsc(p: f64) -> Self {
        Self::from_flat(2, 2, vec![1.0 - p, p, p, 1.0 - p])
    }

    pub fn identity(size: usize) -> Self {
        let mut m = vec![0.0; size * size];
        for i in 0..size {
            m[i * size + i] = 1.0;
        }
        Self::from_flat(size, size, m)
    }

    /// Output law `Σ_x p(x) W(y|x)`.
    pub fn output(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.y_size];
        for (x, &px) in p.iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            for (o, &w) in out.iter_mut().zip(self.row(x)) {
                *o += px * w;
            }
        }
        out
    }
}

/// The arbitrarily varying channel: one transition matrix per state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFamily {
    pub x_size: usize,
    pub y_size: usize,
    pub t_size: usize,
    // [t][x][y]
    w: Vec<f64>,
}

impl ChannelFamily {
    pub fn new(w: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let t_size = w.len();
        if t_size == 0 {
            return Err(Error::Dimension("family has no states".into()));
        }
        let x_size = w[0].len();
        if x_size == 0 {
            return Err(Error::Dimension("family has an empty input alphabet".into()));
        }
        let y_size = w[0][0].len();
        if y_size == 0 {
            return Err(Error::Dimension("family has an empty output alphabet".into()));
        }
        let mut flat = Vec::with_capacity(t_size * x_size * y_size);
        for (t, mat) in w.iter().enumerate() {
            if mat.len() != x_size {
                return Err(Error::Dimension(format!("w[{t}] has {} rows, expected {x_size}", mat.len())));
            }
            for (x, row) in mat.iter().enumerate() {
                if row.len() != y_size {
                    return Err(Error::Dimension(format!(
                        "w[{t}][{x}] has {} entries, expected {y_size}",
                        row.len()
                    )));
                }
                let total: f64 = row.iter().sum();
                if row.iter().any(|v| !v.is_finite() || *v < 0.0) || (total - 1.0).abs() > SUM_TOL {
                    return Err(Error::InvalidDistribution(format!("w[{t}][{x}] is not a distribution")));
                }
                flat.extend(row.iter().map(|v| v / total));
            }
        }
        Ok(Self {
            x_size,
            y_size,
            t_size,
            w: flat,
        })
    }

    pub fn from_channels(chs: &[Channel]) -> Result<Self> {
        let w = chs
            .iter()
            .map(|c| (0..c.x_size).map(|x| c.row(x).to_vec()).collect())
            .collect();
        Self::new(w)
    }

    /// Family of binary symmetric channels, one per crossover.
    pub fn bsc_family(crossovers: &[f64]) -> Self {
        let chs: Vec<Channel> = crossovers.iter().map(|&p| Channel::bsc(p)).collect();
        Self::from_channels(&chs).expect("valid crossovers")
    }

    /// Binary adder `Y = X xor θ`.
    pub fn xor() -> Self {
        Self::new(vec![
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        ])
        .unwrap()
    }

    #[inline]
    pub fn w(&self, t: usize, x: usize, y: usize) -> f64 {
        self.w[(t * self.x_size + x) * self.y_size + y]
    }

    pub fn row(&self, t: usize, x: usize) -> &[f64] {
        let start = (t * self.x_size + x) * self.y_size;
        &self.w[start..start + self.y_size]
    }

    pub fn state(&self, t: usize) -> Channel {
        let size = self.x_size * self.y_size;
        Channel::from_flat(self.x_size, self.y_size, self.w[t * size..(t + 1) * size].to_vec())
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.t_size)
            .map(|t| (0..self.x_size).map(|x| self.row(t, x).to_vec()).collect())
            .collect()
    }

    /// The `q`-averaged channel `Σ_θ q(θ) W(·|·,θ)`.
    pub fn averaged(&self, q: &[f64]) -> Result<Channel> {
        if q.len() != self.t_size {
            return Err(Error::Dimension(format!(
                "state distribution has {} entries, family has {} states",
                q.len(),
                self.t_size
            )));
        }
        let size = self.x_size * self.y_size;
        let mut m = vec![0.0; size];
        for (t, &qt) in q.iter().enumerate() {
            if qt == 0.0 {
                continue;
            }
            for (acc, &w) in m.iter_mut().zip(&self.w[t * size..(t + 1) * size]) {
                *acc += qt * w;
            }
        }
        Ok(Channel::from_flat(self.x_size, self.y_size, m))
    }
}
