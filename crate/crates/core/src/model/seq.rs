//! Sequence spaces addressed by mixed-radix flat indices.
//!
//! A sequence `(a_1, ..., a_m)` over an alphabet of size `r` has flat index
//! `Σ a_i r^(m-i)`, so the first letter is the most significant digit and
//! flat order is lexicographic order.

use serde::Serialize;

use super::dist::Dist;
use super::source::SourceSpec;
use crate::error::{Error, Result};

pub const DEFAULT_BUDGET: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeqSpace {
    pub radix: usize,
    pub len: usize,
}

impl SeqSpace {
    pub fn new(radix: usize, len: usize) -> Self {
        Self { radix, len }
    }

    /// Number of sequences, or `None` on overflow.
    pub fn checked_size(&self) -> Option<usize> {
        self.radix.checked_pow(self.len as u32)
    }

    pub fn size(&self) -> usize {
        self.checked_size().expect("sequence space size overflows usize")
    }

    pub fn size_f64(&self) -> f64 {
        (self.radix as f64).powi(self.len as i32)
    }

    pub fn decode(&self, mut idx: usize, out: &mut [usize]) {
        for slot in out[..self.len].iter_mut().rev() {
            *slot = idx % self.radix;
            idx /= self.radix;
        }
    }

    pub fn digits(&self, idx: usize) -> Vec<usize> {
        let mut v = vec![0; self.len];
        self.decode(idx, &mut v);
        v
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        digits.iter().fold(0, |acc, &d| acc * self.radix + d)
    }
}

pub fn check_budget(what: &str, needed: f64, budget: f64) -> Result<()> {
    if needed > budget || !needed.is_finite() {
        return Err(Error::Budget {
            what: what.to_string(),
            needed,
            budget,
        });
    }
    Ok(())
}

/// Product law of `m` independent letters drawn from `p`.
pub fn iid_extend(p: &Dist, m: usize, budget: f64) -> Result<Dist> {
    if m == 0 {
        return Err(Error::Parameter("sequence length must be at least 1".into()));
    }
    let space = SeqSpace::new(p.len(), m);
    check_budget("i.i.d. extension", space.size_f64(), budget)?;
    Ok(Dist::from_weights(iid_weights(p.probs(), m)).expect("product of a distribution"))
}

/// Unvalidated product weights; used on hot paths where `p` is already a distribution.
pub fn iid_weights(p: &[f64], m: usize) -> Vec<f64> {
    let mut out = vec![1.0];
    for _ in 0..m {
        let mut next = Vec::with_capacity(out.len() * p.len());
        for &o in &out {
            next.extend(p.iter().map(|&pi| o * pi));
        }
        out = next;
    }
    out
}

/// Average per-letter distortion between two equal-length sequences.
pub fn seq_distortion(s: &[usize], s_hat: &[usize], source: &SourceSpec) -> Result<f64> {
    if s.len() != s_hat.len() || s.is_empty() {
        return Err(Error::Dimension(format!(
            "sequence lengths {} and {} must match and be positive",
            s.len(),
            s_hat.len()
        )));
    }
    let total: f64 = s.iter().zip(s_hat).map(|(&a, &b)| source.d(a, b)).sum();
    Ok(total / s.len() as f64)
}

/// Slack used when comparing a sequence distortion against the threshold.
pub const DISTORTION_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallMass {
    pub mass: f64,
    /// True when the distortion values could not be scaled to integers and
    /// the mass was summed over all reproduction sequences.
    pub exhaustive: bool,
}

/// Integer scaling of a distortion matrix and threshold, if all entries are
/// rationals with denominator at most `1e6`.
#[derive(Debug, Clone)]
pub struct IntegerDistortion {
    pub scale: u64,
    pub d: Vec<Vec<u64>>,
}

const MAX_DENOMINATOR: u64 = 1_000_000;

fn denominator(v: f64) -> Option<u64> {
    (1..=MAX_DENOMINATOR).find(|&q| {
        let x = v * q as f64;
        (x - x.round()).abs() <= 1e-9
    })
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl IntegerDistortion {
    pub fn new(source: &SourceSpec) -> Option<Self> {
        let mut scale = 1u64;
        for v in source.d_mat.iter().flatten().chain(std::iter::once(&source.d_max)) {
            let q = denominator(*v)?;
            scale = scale / gcd(scale, q) * q;
            if scale > MAX_DENOMINATOR {
                return None;
            }
        }
        let d = source
            .d_mat
            .iter()
            .map(|row| row.iter().map(|v| (v * scale as f64).round() as u64).collect())
            .collect();
        Some(Self { scale, d })
    }

    /// Largest total integer distortion of a length-`k` pair inside the ball.
    pub fn threshold(&self, d_max: f64, k: usize) -> u64 {
        (d_max * self.scale as f64 * k as f64 + 1e-7).floor() as u64
    }
}

/// `P_Ŝ(B_d(s))` for the i.i.d. product of `p_shat` over `k` letters.
pub fn ball_mass(s: &[usize], p_shat: &Dist, source: &SourceSpec, budget: f64) -> Result<BallMass> {
    let k = s.len();
    if k == 0 || p_shat.len() != source.size() {
        return Err(Error::Dimension("ball_mass needs a nonempty sequence and matching alphabets".into()));
    }
    if let Some(int) = IntegerDistortion::new(source) {
        let thr = int.threshold(source.d_max, k);
        let cells = (thr as f64 + 1.0) * k as f64 * source.size() as f64;
        if cells <= budget {
            return Ok(BallMass {
                mass: ball_mass_dp(s, p_shat.probs(), &int, thr),
                exhaustive: false,
            });
        }
    }
    let space = SeqSpace::new(source.size(), k);
    check_budget("exhaustive ball mass", space.size_f64() * k as f64, budget)?;
    let mut mass = 0.0;
    let mut sh = vec![0; k];
    for idx in 0..space.size() {
        space.decode(idx, &mut sh);
        let d = seq_distortion(s, &sh, source)?;
        if d <= source.d_max + DISTORTION_EPS {
            mass += sh.iter().map(|&l| p_shat[l]).product::<f64>();
        }
    }
    Ok(BallMass { mass, exhaustive: true })
}

/// Dynamic program over the cumulative integer distortion; sums above the
/// threshold are dropped as soon as they appear.
pub fn ball_mass_dp(s: &[usize], p_shat: &[f64], int: &IntegerDistortion, thr: u64) -> f64 {
    let width = thr as usize + 1;
    let mut cur = vec![0.0; width];
    cur[0] = 1.0;
    let mut next = vec![0.0; width];
    for &letter in s {
        next.iter_mut().for_each(|v| *v = 0.0);
        for (acc, &mass) in cur.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for (sh, &p) in p_shat.iter().enumerate() {
                let t = acc + int.d[letter][sh] as usize;
                if t < width && p > 0.0 {
                    next[t] += mass * p;
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur.iter().sum()
}
