//! AVC capacity `max_P min_q I(P, q)`.
//!
//! `f(q) = C(W_q)` is convex in `q`, so the outer problem is a convex
//! minimisation over the state simplex and is solved with cutting planes.
//! At each query point the single-channel solver returns an input law `P_j`, an upper
//! bound on `C(W_q)` and the linearisation of `I(P_j, .)`, which lies below
//! `f` everywhere. The master value is therefore a certified lower bound on
//! the capacity and the best single-channel upper bound a certified upper bound.
//! The master weights `μ_j` mix the `P_j` into a max-min input law.

use serde::Serialize;

use super::info::{dmc_capacity, mutual_information};
use super::kelley::{self, KelleyOptions, Probe};
use crate::error::{Error, Result};
use crate::model::{Channel, ChannelFamily, Dist};

pub const DEFAULT_TOL: f64 = 1e-8;
const MAX_CUTS: usize = 2000;
const BA_TOL: f64 = 1e-12;
const BA_MAX_ITER: usize = 20_000;

fn kelley_opts(tol: f64) -> KelleyOptions {
    KelleyOptions {
        tol,
        max_iter: MAX_CUTS,
        interior: 1e-10,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CapacityResult {
    pub c_bits: f64,
    pub p_x_star: Dist,
    pub q_theta_star: Dist,
    /// Certified bracket width `upper - lower`.
    pub gap: f64,
    pub iterations: usize,
    pub lower: f64,
    pub upper: f64,
}

/// `∂ I(P, q) / ∂ q_θ` at a strictly positive `q`.
pub fn info_gradient_q(family: &ChannelFamily, p: &[f64], q: &[f64]) -> Result<(f64, Vec<f64>)> {
    let wq = family.averaged(q)?;
    let out = wq.output(p);
    let mut grad = vec![0.0; family.t_size];
    for (t, g) in grad.iter_mut().enumerate() {
        for (x, &px) in p.iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            for (y, &w) in family.row(t, x).iter().enumerate() {
                if w > 0.0 {
                    *g += px * w * (wq.get(x, y) / out[y]).log2();
                }
            }
        }
    }
    Ok((mutual_information(p, &wq), grad))
}

fn check_dims(family: &ChannelFamily, p: &[f64]) -> Result<()> {
    if p.len() != family.x_size {
        return Err(Error::Dimension(format!(
            "input law has {} entries, family has {} inputs",
            p.len(),
            family.x_size
        )));
    }
    Ok(())
}

pub fn avc_capacity(family: &ChannelFamily, tol: f64) -> Result<CapacityResult> {
    if !(tol > 0.0) {
        return Err(Error::Parameter("tol must be positive".into()));
    }
    let mut inputs: Vec<Vec<f64>> = Vec::new();
    let out = kelley::minimize(
        family.t_size,
        kelley::vertex_seeds(family.t_size),
        |q| {
            let wq = family.averaged(q)?;
            let ba = dmc_capacity(&wq, BA_TOL, BA_MAX_ITER);
            let (value, grad) = info_gradient_q(family, &ba.p, q)?;
            inputs.push(ba.p);
            Ok(Probe::single(ba.upper, value, grad))
        },
        kelley_opts(tol),
    )?
    .require("capacity cutting planes")?;
    let mut p_bar = vec![0.0; family.x_size];
    for (mu, p) in out.weights.iter().zip(&inputs) {
        for (a, b) in p_bar.iter_mut().zip(p) {
            *a += mu[0] * b;
        }
    }
    let lower = out.lower.max(0.0);
    let upper = out.upper;
    Ok(CapacityResult {
        c_bits: 0.5 * (lower + upper),
        p_x_star: Dist::from_weights(p_bar)?,
        q_theta_star: Dist::from_weights(out.best)?,
        gap: upper - lower,
        iterations: out.iterations,
        lower,
        upper,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MinOverStates {
    pub value: f64,
    pub lower: f64,
    pub q: Dist,
}

/// `min_q I(P, q)` for a fixed input law; convex in `q`.
pub fn min_info_over_states(family: &ChannelFamily, p: &[f64], tol: f64) -> Result<MinOverStates> {
    check_dims(family, p)?;
    let out = kelley::minimize(
        family.t_size,
        kelley::vertex_seeds(family.t_size),
        |q| {
            let (value, grad) = info_gradient_q(family, p, q)?;
            Ok(Probe::single(value, value, grad))
        },
        kelley_opts(tol),
    )?
    .require("minimisation over state laws")?;
    Ok(MinOverStates {
        value: out.upper,
        lower: out.lower,
        q: Dist::from_weights(out.best)?,
    })
}

/// `max_P I(P, q)` for a fixed state law, i.e. the capacity of `W_q`.
pub fn max_info_over_inputs(family: &ChannelFamily, q: &[f64]) -> Result<(f64, Vec<f64>)> {
    let wq: Channel = family.averaged(q)?;
    let ba = dmc_capacity(&wq, BA_TOL, BA_MAX_ITER);
    Ok((ba.upper, ba.p))
}
