//! Berry-Esseen moments of a sum of independent variables, and the
//! per-letter variables `W_l` of the joint source-channel sum.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ChannelFamily, Dist, SourceSpec};
use crate::singleletter::info::{info_density_moments, moments, Moments};
use crate::singleletter::{d_tilted_info, RateDistortionResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BerryEsseen {
    pub d: f64,
    pub v: f64,
    pub a: f64,
    /// `c0 A / V^{3/2}`.
    pub b: f64,
}

/// Averaged mean, variance and absolute third moment, and `B = c0 A / V^{3/2}`.
pub fn berry_esseen_terms(means: &[f64], vars: &[f64], abs3: &[f64], c0: f64) -> Result<BerryEsseen> {
    let n = means.len();
    if n == 0 || vars.len() != n || abs3.len() != n {
        return Err(Error::Dimension("moment vectors must be nonempty and of equal length".into()));
    }
    if vars.iter().chain(abs3).chain(means).any(|v| !v.is_finite()) || vars.iter().chain(abs3).any(|v| *v < 0.0) {
        return Err(Error::Parameter("moments must be finite, variances and third moments nonnegative".into()));
    }
    let m = n as f64;
    let d = means.iter().sum::<f64>() / m;
    let v = vars.iter().sum::<f64>() / m;
    let a = abs3.iter().sum::<f64>() / m;
    if v <= 0.0 {
        return Err(Error::Undefined("degenerate sum: zero average variance".into()));
    }
    Ok(BerryEsseen { d, v, a, b: c0 * a / v.powf(1.5) })
}

/// Moments of `W_1..W_{n+k}`: the first `n` are `i_{X*;Y_{q*}}(X_l;Y_l)`
/// with `(X_l, Y_l) ~ p_x × W_{q_l}`, the last `k` are `-j_S(S_l, d)`.
pub fn wl_moments(
    family: &ChannelFamily,
    p_x: &Dist,
    q_star: &Dist,
    states: &[Dist],
    source: &SourceSpec,
    rd: &RateDistortionResult,
    k: usize,
) -> Result<Vec<Moments>> {
    let reference = family.averaged(q_star.probs())?;
    let mut out = Vec::with_capacity(states.len() + k);
    for q in states {
        let ch = family.averaged(q.probs())?;
        out.push(info_density_moments(p_x.probs(), &ch, p_x.probs(), &reference)?);
    }
    let vals: Vec<(f64, f64)> = source
        .p_s
        .probs()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(s, &p)| (p, -d_tilted_info(source, rd, s)))
        .collect();
    if vals.iter().any(|(_, v)| !v.is_finite()) {
        return Err(Error::Undefined("d-tilted information is infinite".into()));
    }
    let src = moments(&vals);
    out.extend(std::iter::repeat_n(src, k));
    Ok(out)
}
