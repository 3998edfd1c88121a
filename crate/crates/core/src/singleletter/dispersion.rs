//! Source and channel dispersions.
//!
//! The optimal sets `Π_X`, `Π_Θ` are approximated by the points of a simplex
//! grid (plus the saddle point itself) whose value is within `tol_face` of
//! the capacity. `V_C^+` and `V_C^-` are the min-max and max-min of the
//! information-density variance over these finite sets.

use serde::Serialize;

use super::capacity::{max_info_over_inputs, min_info_over_states, CapacityResult};
use super::info::{info_variance, mutual_information};
use super::ratedist::{d_tilted_info, RateDistortionResult};
use crate::error::{Error, Result};
use crate::model::{ChannelFamily, Dist, SourceSpec};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DispersionOptions {
    pub tol_face: f64,
    /// L1 diameter below which the optimal state law counts as unique.
    pub diameter_tol: f64,
    /// Upper limit on grid points per simplex.
    pub grid_points: usize,
}

impl Default for DispersionOptions {
    fn default() -> Self {
        Self {
            tol_face: 1e-6,
            diameter_tol: 1e-3,
            grid_points: 2000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DispersionResult {
    pub v_s: f64,
    pub v_c_plus: f64,
    pub v_c_minus: f64,
    pub v0: f64,
    pub unique_q_star: bool,
    /// Input law attaining `V_C^+`; the one the achievability bounds use.
    pub p_x_plus: Dist,
    pub pi_x_size: usize,
    pub pi_theta_size: usize,
    pub q_diameter: f64,
}

/// All points of the simplex with coordinates in multiples of `1/res`.
pub fn simplex_grid(dim: usize, res: usize) -> Vec<Vec<f64>> {
    fn rec(dim: usize, left: usize, res: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if cur.len() == dim - 1 {
            cur.push(left);
            out.push(cur.iter().map(|&c| c as f64 / res as f64).collect());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(dim, left - c, res, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, res, res, &mut Vec::new(), &mut out);
    out
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Finest resolution whose grid stays within `limit` points.
pub fn grid_resolution(dim: usize, limit: usize) -> usize {
    if dim <= 1 {
        return 1;
    }
    let mut res = 1;
    while binom(res + 1 + dim - 1, dim - 1) <= limit as f64 && res < 1000 {
        res += 1;
    }
    res
}

/// Variance of the matched information density under `P × W_q`.
pub fn channel_variance(family: &ChannelFamily, p: &[f64], q: &[f64]) -> Result<f64> {
    Ok(info_variance(p, &family.averaged(q)?))
}

pub fn source_dispersion(source: &SourceSpec, rd: &RateDistortionResult) -> f64 {
    let p = source.p_s.probs();
    let j: Vec<f64> = (0..source.size()).map(|s| d_tilted_info(source, rd, s)).collect();
    let mean: f64 = p.iter().zip(&j).filter(|(p, _)| **p > 0.0).map(|(p, v)| p * v).sum();
    p.iter()
        .zip(&j)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, v)| p * (v - mean) * (v - mean))
        .sum::<f64>()
        .max(0.0)
}

/// Approximate `Π_Θ`: state laws whose averaged-channel capacity is within
/// `tol_face` of `C`.
pub fn approx_pi_theta(family: &ChannelFamily, caps: &CapacityResult, opts: &DispersionOptions) -> Result<Vec<Vec<f64>>> {
    let dim = family.t_size;
    let mut set = vec![caps.q_theta_star.probs().to_vec()];
    for q in simplex_grid(dim, grid_resolution(dim, opts.grid_points)) {
        let (c, _) = max_info_over_inputs(family, &q)?;
        if c <= caps.upper + opts.tol_face {
            set.push(q);
        }
    }
    Ok(set)
}

/// Approximate `Π_X`: input laws whose worst-case mutual information is within
/// `tol_face` of `C`.
pub fn approx_pi_x(family: &ChannelFamily, caps: &CapacityResult, opts: &DispersionOptions) -> Result<Vec<Vec<f64>>> {
    let dim = family.x_size;
    let c = caps.lower;
    let q_star = caps.q_theta_star.probs();
    let w_star = family.averaged(q_star)?;
    let mut set = vec![caps.p_x_star.probs().to_vec()];
    for p in simplex_grid(dim, grid_resolution(dim, opts.grid_points)) {
        // min_q I(P, q) <= I(P, q*), so most points are rejected cheaply
        if mutual_information(&p, &w_star) < c - opts.tol_face {
            continue;
        }
        let m = min_info_over_states(family, &p, 1e-10)?;
        if m.value >= c - opts.tol_face {
            set.push(p);
        }
    }
    Ok(set)
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// `sup_q Var` at a fixed input law: grid search followed by a pattern search
/// that moves mass between pairs of states.
pub fn sup_variance_over_states(family: &ChannelFamily, p: &[f64], extra: &[Vec<f64>], grid_points: usize) -> Result<(f64, Vec<f64>)> {
    let dim = family.t_size;
    let mut best_q = vec![1.0 / dim as f64; dim];
    let mut best = channel_variance(family, p, &best_q)?;
    for q in simplex_grid(dim, grid_resolution(dim, grid_points)).iter().chain(extra) {
        let v = channel_variance(family, p, q)?;
        if v > best {
            best = v;
            best_q = q.clone();
        }
    }
    let mut h: f64 = 0.1;
    while h > 1e-10 {
        let mut improved = false;
        for i in 0..dim {
            for j in 0..dim {
                if i == j || best_q[i] <= 0.0 {
                    continue;
                }
                let step = h.min(best_q[i]);
                let mut q = best_q.clone();
                q[i] -= step;
                q[j] += step;
                let v = channel_variance(family, p, &q)?;
                if v > best {
                    best = v;
                    best_q = q;
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    Ok((best, best_q))
}

pub fn dispersions(
    family: &ChannelFamily,
    source: &SourceSpec,
    caps: &CapacityResult,
    rd: &RateDistortionResult,
    opts: &DispersionOptions,
) -> Result<DispersionResult> {
    if !(opts.tol_face > 0.0) {
        return Err(Error::Parameter("tol_face must be positive".into()));
    }
    let v_s = source_dispersion(source, rd);
    let pi_t = approx_pi_theta(family, caps, opts)?;
    let pi_x = approx_pi_x(family, caps, opts)?;
    if pi_t.is_empty() || pi_x.is_empty() {
        return Err(Error::Parameter(format!(
            "no approximately optimal laws at tol_face = {}",
            opts.tol_face
        )));
    }
    let mut table = vec![vec![0.0; pi_t.len()]; pi_x.len()];
    for (i, p) in pi_x.iter().enumerate() {
        for (j, q) in pi_t.iter().enumerate() {
            table[i][j] = channel_variance(family, p, q)?;
        }
    }
    let (mut v_plus, mut arg_plus) = (f64::INFINITY, 0);
    for (i, row) in table.iter().enumerate() {
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if m < v_plus {
            v_plus = m;
            arg_plus = i;
        }
    }
    let v_minus = (0..pi_t.len())
        .map(|j| table.iter().map(|row| row[j]).fold(f64::INFINITY, f64::min))
        .fold(f64::NEG_INFINITY, f64::max);
    let p_plus = pi_x[arg_plus].clone();
    let (v0, _) = sup_variance_over_states(family, &p_plus, &pi_t, opts.grid_points)?;
    let mut diameter: f64 = 0.0;
    for a in &pi_t {
        for b in &pi_t {
            diameter = diameter.max(l1(a, b));
        }
    }
    Ok(DispersionResult {
        v_s,
        v_c_plus: v_plus.max(0.0),
        v_c_minus: v_minus.max(0.0),
        v0: v0.max(v_plus).max(0.0),
        unique_q_star: diameter <= opts.diameter_tol,
        p_x_plus: Dist::from_weights(p_plus)?,
        pi_x_size: pi_x.len(),
        pi_theta_size: pi_t.len(),
        q_diameter: diameter,
    })
}
