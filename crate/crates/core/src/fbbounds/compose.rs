//! Composite bounds: the minimax upper bound, the asymptotic sandwich, the
//! second-order limit and the dispersion rates.

use serde::{Deserialize, Serialize};

use super::gaussian::{q_func, q_inv};
use super::jscc::{big_gamma, theorem10_bound, theorem7_bound, Theorem7Inputs};
use super::params::BoundParams;
use super::prefix::{index_code_lengths, theorem5_bound, theorem9_bound, AlphabetSizes, Theorem5Inputs};
use super::report::BoundReport;
use crate::error::{Error, Result};
use crate::model::{ChannelFamily, Dist, GameInstance, SourceSpec};
use crate::singleletter::capacity::DEFAULT_TOL as CAP_TOL;
use crate::singleletter::ratedist::DEFAULT_TOL as RD_TOL;
use crate::singleletter::{avc_capacity, dispersions, rate_distortion, DispersionOptions};

/// The single-letter constants entering the second-order bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SecondOrder {
    pub c: f64,
    pub r: f64,
    pub v_c_plus: f64,
    pub v_c_minus: f64,
    pub v_s: f64,
    pub v0: f64,
    pub sizes: AlphabetSizes,
    pub unique_q_star: bool,
}

impl SecondOrder {
    pub fn compute(family: &ChannelFamily, source: &SourceSpec) -> Result<Self> {
        let caps = avc_capacity(family, CAP_TOL)?;
        let rd = rate_distortion(source, RD_TOL)?;
        let disp = dispersions(family, source, &caps, &rd, &DispersionOptions::default())?;
        Ok(Self {
            c: caps.c_bits,
            r: rd.r_bits,
            v_c_plus: disp.v_c_plus,
            v_c_minus: disp.v_c_minus,
            v_s: disp.v_s,
            v0: disp.v0,
            sizes: AlphabetSizes::of(family),
            unique_q_star: disp.unique_q_star,
        })
    }
}

/// Components of the minimax upper bound at a tiny instance.
#[derive(Debug, Clone, Serialize)]
pub struct Theorem8Inputs {
    /// Index-code blocklength.
    pub d_n: usize,
    /// Number of codes in the reduced ensemble.
    pub k_codes: f64,
    pub p_x_index: Dist,
    pub typ_gamma: f64,
    pub jscc: Theorem7Inputs,
}

/// Index-code bound at `(d_n, M = K)` plus the random-code bound at `n`.
/// The code uses `d_n + n` channel letters, so the rate is `k / (d_n + n)`.
pub fn theorem8_bound(inst: &GameInstance, params: &BoundParams, inp: &Theorem8Inputs) -> Result<BoundReport> {
    let eval = inp.jscc.eval;
    let t5 = theorem5_bound(
        &inst.family,
        &Theorem5Inputs {
            n: inp.d_n,
            p_x: inp.p_x_index.clone(),
            typ_gamma: inp.typ_gamma,
            m_codes: inp.k_codes,
            eta: params.eta,
            eval,
            budget: inst.budget,
        },
    )?;
    let t7 = theorem7_bound(inst, &inp.jscc)?;
    let mut r = BoundReport::sum(
        "t8",
        &[
            ("index_sqrt", t5.term("index_sqrt")),
            ("not_typical", t5.term("not_typical")),
            ("z_fixed", t5.term("z_fixed")),
            ("z_random", t5.term("z_random")),
            ("random_code", t7.raw),
        ],
    )
    .detail("d_n", inp.d_n as f64)
    .detail("k_codes", inp.k_codes)
    .detail("gamma", t7.details["gamma"])
    .detail("rate", inst.k as f64 / (inp.d_n + inst.n) as f64)
    .with_params(params);
    r.mc_ci = match (t5.mc_ci, t7.mc_ci) {
        (None, None) => None,
        (a, b) => Some(a.unwrap_or(0.0) + b.unwrap_or(0.0)),
    };
    Ok(r)
}

/// Upper bound on the upper value: the Gaussian random-code terms plus the
/// index-code terms at `K = c0 n`, `d_n = ceil(log K / (C - δ))`.
pub fn theorem11_upper(n: f64, k: f64, so: &SecondOrder, params: &BoundParams) -> Result<BoundReport> {
    let (kk, d_n) = index_code_lengths(n as usize, so.c, params)?;
    let t10 = theorem10_bound(n, k, so, params)?;
    let t9 = theorem9_bound(params, so.c, d_n, kk, so.v0, so.sizes)?;
    let terms: Vec<(&str, f64)> = t10.terms.iter().chain(&t9.terms).map(|(a, b)| (a.as_str(), *b)).collect();
    let mut r = BoundReport::sum("t11", &terms).with_params(params);
    r.details = t10.details.into_iter().chain(t9.details).collect();
    Ok(r)
}

/// Lower bound on the lower value:
/// `Q((nC - kR + K4 log(n+1)) / √(n V_C + k V_S - K3)) - K1/k - K2/√n - B'/√(n+k) - 1/√(n+1)`.
pub fn theorem12_lower(n: f64, k: f64, so: &SecondOrder, params: &BoundParams) -> Result<BoundReport> {
    if !(n >= 1.0 && k >= 1.0) {
        return Err(Error::Parameter("theorem 12 needs n, k >= 1".into()));
    }
    let var = n * so.v_c_minus + k * so.v_s - params.k3;
    if !(var > 0.0) {
        return Err(Error::Undefined("n V_C + k V_S - K3 must be positive".into()));
    }
    let small_gamma = params.k4 * (n + 1.0).log2();
    let arg = (n * so.c - k * so.r + small_gamma) / var.sqrt();
    Ok(BoundReport::sum(
        "t12",
        &[
            ("gaussian", q_func(arg)),
            ("k1", -params.k1 / k),
            ("k2", -params.k2 / n.sqrt()),
            ("b_prime", -params.b_prime / (n + k).sqrt()),
            ("finite_n", -1.0 / (n + 1.0).sqrt()),
        ],
    )
    .detail("argument", arg)
    .detail("small_gamma", small_gamma)
    .detail("n", n)
    .detail("k", k)
    .with_params(params))
}

/// `Q(-ρ R / √(V_C + (C/R) V_S))`.
pub fn second_order_limit(rho: f64, c: f64, r: f64, v_c: f64, v_s: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Undefined("the limit needs R(d) > 0".into()));
    }
    let den = v_c + (c / r) * v_s;
    if !(den > 0.0) {
        return Err(Error::Undefined("V_C + (C/R) V_S must be positive".into()));
    }
    Ok(q_func(-rho * r / den.sqrt()))
}

/// `k` on the sequence `k/n = C/R + ρ/√n`: the requested real value and the
/// nearest integer (ties up, at least 1).
pub fn k_on_sequence(n: f64, rho: f64, c: f64, r: f64) -> Result<(f64, f64)> {
    if !(r > 0.0 && n >= 1.0) {
        return Err(Error::Parameter("the sequence needs R(d) > 0 and n >= 1".into()));
    }
    let k = n * (c / r + rho / n.sqrt());
    Ok((k, (k + 0.5).floor().max(1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateDirection {
    Achievability,
    Converse,
}

#[derive(Debug, Clone, Serialize)]
pub struct RatesReport {
    pub direction: RateDirection,
    pub n: f64,
    pub eps: f64,
    /// `None` when no `k` satisfies the condition.
    pub k: Option<f64>,
    pub rate: Option<f64>,
    pub note: Option<String>,
}

const K_CAP: f64 = 4.0e18;

/// Achievability: largest `k` with `nC - kR - Γ(k) ≥ √(n V_C + k V_S) Q⁻¹(ε)`.
/// Converse: smallest `k` with `nC - kR + γ(n) ≤ √(n V_C + k V_S) Q⁻¹(ε)`.
/// Both conditions are taken as monotone in `k` and solved by bisection.
pub fn dispersion_rates(n: f64, eps: f64, so: &SecondOrder, params: &BoundParams, direction: RateDirection) -> Result<RatesReport> {
    let qi = q_inv(eps)?;
    if !(n >= 1.0) || !(so.r > 0.0) {
        return Err(Error::Parameter("rates need n >= 1 and R(d) > 0".into()));
    }
    let small_gamma = params.k4 * (n + 1.0).log2();
    let ok = |k: f64| -> bool {
        match direction {
            RateDirection::Achievability => {
                n * so.c - k * so.r - big_gamma(k, params) >= (n * so.v_c_plus + k * so.v_s).sqrt() * qi
            }
            RateDirection::Converse => n * so.c - k * so.r + small_gamma <= (n * so.v_c_minus + k * so.v_s).sqrt() * qi,
        }
    };
    let report = |k: Option<f64>, note: Option<&str>| RatesReport {
        direction,
        n,
        eps,
        k,
        rate: k.map(|k| k / n),
        note: note.map(str::to_string),
    };
    match direction {
        RateDirection::Achievability => {
            if !ok(1.0) {
                return Ok(report(None, Some("no k >= 1 meets the achievability condition")));
            }
            let mut lo = 1.0;
            let mut hi = 2.0;
            while ok(hi) {
                lo = hi;
                hi *= 2.0;
                if hi > K_CAP {
                    return Ok(report(Some(lo), Some("search stopped at the k cap")));
                }
            }
            while hi - lo > 1.0 {
                let mid = ((lo + hi) / 2.0).floor();
                if ok(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(report(Some(lo), None))
        }
        RateDirection::Converse => {
            if ok(1.0) {
                return Ok(report(Some(1.0), Some("condition already holds at k = 1")));
            }
            let mut lo = 1.0;
            let mut hi = 2.0;
            while !ok(hi) {
                lo = hi;
                hi *= 2.0;
                if hi > K_CAP {
                    return Ok(report(None, Some("no k below the cap meets the converse condition")));
                }
            }
            while hi - lo > 1.0 {
                let mid = ((lo + hi) / 2.0).floor();
                if ok(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Ok(report(Some(hi), None))
        }
    }
}

