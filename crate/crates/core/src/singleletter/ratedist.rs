//! Rate-distortion function by Blahut-Arimoto with a slope search.
//!
//! For slope `β` (nats per unit distortion) the fixed point
//! `Q(ŝ|s) ∝ P̂(ŝ) e^{-β d(s,ŝ)}`, `P̂ = P_S Q` traces the curve; `β` is
//! bisected until the expected distortion equals `d_max`, and then
//! `λ* = -R'(d_max) = β` in nats.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Dist, SourceSpec};

pub const DEFAULT_TOL: f64 = 1e-12;
const LOSSLESS_SLACK: f64 = 1e-12;
const BA_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, Serialize)]
pub struct RateDistortionResult {
    pub r_bits: f64,
    pub p_shat_star: Dist,
    /// `-R'(d_max)` in nats per unit distortion; infinite on the lossless branch.
    pub lambda_star: f64,
    pub lossless: bool,
    pub distortion: f64,
    pub iterations: usize,
}

impl RateDistortionResult {
    /// `-R'(d_max)` in bits per unit distortion.
    pub fn lambda_bits(&self) -> f64 {
        self.lambda_star * std::f64::consts::LOG2_E
    }
}

/// Fixed point at slope `beta`, warm started at `p_hat`. Returns the
/// reproduction law, rate in bits, distortion and iterations used.
fn ba_at_slope(source: &SourceSpec, beta: f64, p_hat: &mut [f64], tol: f64) -> (f64, f64, usize) {
    let a = source.size();
    let p = source.p_s.probs();
    let mut cond = vec![0.0; a * a];
    let mut iters = 0;
    loop {
        fill_conditional(source, beta, p_hat, &mut cond);
        let mut next = vec![0.0; a];
        for s in 0..a {
            for sh in 0..a {
                next[sh] += p[s] * cond[s * a + sh];
            }
        }
        let change: f64 = next.iter().zip(p_hat.iter()).map(|(x, y)| (x - y).abs()).sum();
        p_hat.copy_from_slice(&next);
        iters += 1;
        if change <= tol || iters >= BA_MAX_ITER {
            break;
        }
    }
    fill_conditional(source, beta, p_hat, &mut cond);
    let mut rate = 0.0;
    let mut dist = 0.0;
    for s in 0..a {
        for sh in 0..a {
            let c = cond[s * a + sh];
            if c > 0.0 && p[s] > 0.0 {
                rate += p[s] * c * (c / p_hat[sh]).log2();
                dist += p[s] * c * source.d(s, sh);
            }
        }
    }
    (rate.max(0.0), dist, iters)
}

fn fill_conditional(source: &SourceSpec, beta: f64, p_hat: &[f64], cond: &mut [f64]) {
    let a = source.size();
    for s in 0..a {
        // shift by the row minimum so the largest weight is e^0
        let dmin = (0..a)
            .filter(|&sh| p_hat[sh] > 0.0)
            .map(|sh| source.d(s, sh))
            .fold(f64::INFINITY, f64::min);
        let mut z = 0.0;
        for sh in 0..a {
            let w = if p_hat[sh] > 0.0 {
                p_hat[sh] * (-beta * (source.d(s, sh) - dmin)).exp()
            } else {
                0.0
            };
            cond[s * a + sh] = w;
            z += w;
        }
        for sh in 0..a {
            cond[s * a + sh] /= z;
        }
    }
}

/// Letters achieving `min_ŝ d(s, ŝ)` for each `s`.
fn argmin_sets(source: &SourceSpec) -> Vec<Vec<bool>> {
    (0..source.size())
        .map(|s| {
            let m = source.d_mat[s].iter().copied().fold(f64::INFINITY, f64::min);
            source.d_mat[s].iter().map(|&v| v <= m + LOSSLESS_SLACK).collect()
        })
        .collect()
}

/// `min I(S; Ŝ)` over channels supported on the distortion-minimising letters.
fn lossless(source: &SourceSpec, tol: f64) -> Result<RateDistortionResult> {
    let a = source.size();
    let p = source.p_s.probs();
    let allowed = argmin_sets(source);
    let mut p_hat = vec![1.0 / a as f64; a];
    let mut cond = vec![0.0; a * a];
    let mut iterations = 0;
    let fill = |p_hat: &[f64], cond: &mut [f64]| {
        for s in 0..a {
            let z: f64 = (0..a).filter(|&sh| allowed[s][sh]).map(|sh| p_hat[sh]).sum();
            for sh in 0..a {
                cond[s * a + sh] = if allowed[s][sh] && z > 0.0 { p_hat[sh] / z } else { 0.0 };
            }
        }
    };
    loop {
        fill(&p_hat, &mut cond);
        let mut next = vec![0.0; a];
        for s in 0..a {
            for sh in 0..a {
                next[sh] += p[s] * cond[s * a + sh];
            }
        }
        let change: f64 = next.iter().zip(&p_hat).map(|(x, y)| (x - y).abs()).sum();
        p_hat = next;
        iterations += 1;
        if change <= tol || iterations >= BA_MAX_ITER {
            break;
        }
    }
    fill(&p_hat, &mut cond);
    let mut r = 0.0;
    for s in 0..a {
        for sh in 0..a {
            let c = cond[s * a + sh];
            if c > 0.0 && p[s] > 0.0 {
                r += p[s] * c * (c / p_hat[sh]).log2();
            }
        }
    }
    Ok(RateDistortionResult {
        r_bits: r.max(0.0),
        p_shat_star: Dist::from_weights(p_hat)?,
        lambda_star: f64::INFINITY,
        lossless: true,
        distortion: source.d_min(),
        iterations,
    })
}

pub fn rate_distortion(source: &SourceSpec, tol: f64) -> Result<RateDistortionResult> {
    if !(tol > 0.0) {
        return Err(Error::Parameter("tol must be positive".into()));
    }
    let d_max = source.d_max;
    let d_min = source.d_min();
    if d_max < d_min - LOSSLESS_SLACK {
        return Err(Error::InfeasibleDistortion { d_max, d_min });
    }
    let (d_const, letter) = source.best_constant();
    if d_max >= d_const {
        return Ok(RateDistortionResult {
            r_bits: 0.0,
            p_shat_star: Dist::point(source.size(), letter),
            lambda_star: 0.0,
            lossless: false,
            distortion: d_const,
            iterations: 0,
        });
    }
    if d_max <= d_min + LOSSLESS_SLACK {
        return lossless(source, tol);
    }
    let a = source.size();
    let mut p_hat = vec![1.0 / a as f64; a];
    let mut iterations = 0;
    // grow the upper slope until the distortion drops below the target
    let mut lo = 0.0;
    let mut hi = 1.0;
    loop {
        let mut ph = p_hat.clone();
        let (_, d, it) = ba_at_slope(source, hi, &mut ph, tol);
        iterations += it;
        if d <= d_max {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NonConvergence {
                what: "rate-distortion slope bracket".into(),
                iterations,
                gap: d - d_max,
            });
        }
    }
    let mut best = None;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (r, d, it) = ba_at_slope(source, mid, &mut p_hat, tol);
        iterations += it;
        best = Some((mid, r, d, p_hat.clone()));
        if (d - d_max).abs() <= 1e-13 || hi - lo <= 1e-15 * hi.max(1.0) {
            break;
        }
        if d > d_max {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (beta, r, d, ph) = best.expect("bisection ran");
    Ok(RateDistortionResult {
        r_bits: r,
        p_shat_star: Dist::from_weights(ph)?,
        lambda_star: beta,
        lossless: false,
        distortion: d,
        iterations,
    })
}

/// `j_S(s, d) = -log2 E_{P̂*}[exp(λ* d - λ* d(s, Ŝ))]`, `+inf` when the
/// expectation vanishes.
pub fn d_tilted_info(source: &SourceSpec, rd: &RateDistortionResult, s: usize) -> f64 {
    let p_hat = rd.p_shat_star.probs();
    if rd.lossless {
        let allowed = &argmin_sets(source)[s];
        let m: f64 = p_hat.iter().zip(allowed).filter(|(_, &ok)| ok).map(|(p, _)| p).sum();
        return if m > 0.0 { -m.log2() } else { f64::INFINITY };
    }
    let beta = rd.lambda_star;
    let e: f64 = p_hat
        .iter()
        .enumerate()
        .map(|(sh, &p)| p * (beta * (source.d_max - source.d(s, sh))).exp())
        .sum();
    if e > 0.0 {
        -e.log2()
    } else {
        f64::INFINITY
    }
}

/// Sum of per-letter tilted information over a source sequence.
pub fn seq_tilted_info(source: &SourceSpec, rd: &RateDistortionResult, s: &[usize]) -> f64 {
    s.iter().map(|&l| d_tilted_info(source, rd, l)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::binary_entropy;

    #[test]
    fn binary_hamming_closed_form() {
        let src = SourceSpec::hamming(Dist::uniform(2), 0.11);
        let rd = rate_distortion(&src, DEFAULT_TOL).unwrap();
        assert!((rd.r_bits - (1.0 - binary_entropy(0.11))).abs() < 1e-9);
        // λ* = ln((1-d)/d)
        assert!((rd.lambda_star - (0.89f64 / 0.11).ln()).abs() < 1e-7);
        for s in 0..2 {
            assert!((d_tilted_info(&src, &rd, s) - rd.r_bits).abs() < 1e-9);
        }
    }

    #[test]
    fn branches() {
        let zero = rate_distortion(&SourceSpec::hamming(Dist::uniform(2), 0.5), 1e-12).unwrap();
        assert_eq!(zero.r_bits, 0.0);
        assert_eq!(d_tilted_info(&SourceSpec::hamming(Dist::uniform(2), 0.5), &zero, 1), 0.0);
        let p = Dist::new(vec![0.2, 0.3, 0.5]).unwrap();
        let src = SourceSpec::hamming(p.clone(), 0.0);
        let ll = rate_distortion(&src, 1e-14).unwrap();
        assert!(ll.lossless);
        assert!((ll.r_bits - p.entropy()).abs() < 1e-12);
        assert!((d_tilted_info(&src, &ll, 0) - (1.0f64 / 0.2).log2()).abs() < 1e-12);
        let bad = SourceSpec::new(Dist::uniform(2), vec![vec![0.1, 1.0], vec![1.0, 0.1]], 0.05).unwrap();
        assert!(matches!(rate_distortion(&bad, 1e-12), Err(Error::InfeasibleDistortion { .. })));
    }
}
