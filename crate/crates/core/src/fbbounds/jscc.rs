//! Bounds for the random joint source-channel code: the exact weak
//! achievability bound and its Gaussian approximation.

use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::gaussian::q_func;
use super::params::BoundParams;
use super::prefix::type_representatives;
use super::report::BoundReport;
use super::SecondOrder;
use crate::error::{Error, Result};
use crate::lprelax::Evaluation;
use crate::model::seq::{check_budget, iid_weights};
use crate::model::{ball_mass, Dist, GameInstance};
use crate::seeding;

#[derive(Debug, Clone, Serialize)]
pub struct Theorem7Inputs {
    /// Per-letter state law defining the decoding metric.
    pub q_star: Dist,
    /// Per-letter channel codebook law.
    pub p_x: Dist,
    /// Per-letter source codebook law.
    pub p_shat: Dist,
    pub gamma_grid: Vec<f64>,
    pub eval: Evaluation,
}

/// `points` log-spaced values of γ in `[1, 100]`; below 1 the additive
/// `e^{1-γ}` alone exceeds 1.
pub fn default_t7_gamma_grid(points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![10.0];
    }
    (0..points).map(|i| 100f64.powf(i as f64 / (points - 1) as f64)).collect()
}

/// Per-letter information density table `log2 W_{q*}(b|a) / (P_X W_{q*})(b)`.
fn letter_density(inst: &GameInstance, inp: &Theorem7Inputs) -> Result<Vec<Vec<f64>>> {
    let fam = &inst.family;
    if inp.q_star.len() != fam.t_size || inp.p_x.len() != fam.x_size || inp.p_shat.len() != inst.source.size() {
        return Err(Error::Dimension("q_star, p_x and p_shat must match the alphabets".into()));
    }
    let reference = fam.averaged(inp.q_star.probs())?;
    let out = reference.output(inp.p_x.probs());
    Ok((0..fam.x_size)
        .map(|a| {
            (0..fam.y_size)
                .map(|b| {
                    let w = reference.get(a, b);
                    if w == 0.0 || out[b] == 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        (w / out[b]).log2()
                    }
                })
                .collect()
        })
        .collect())
}

/// `2^{-|i - log2(γ / P_Ŝ(B_d(s)))|^+}` written with `lb = log2 1/P_Ŝ(B_d(s))`.
#[inline]
fn kernel(i: f64, gamma: f64, lb: f64) -> f64 {
    let arg = i - gamma.log2() - lb;
    if arg.is_nan() || arg <= 0.0 {
        1.0
    } else {
        (-arg).exp2()
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
        return Err(Error::Parameter("gamma grid must be nonempty and positive".into()));
    }
    Ok(())
}

/// `inf_γ max_θ E[exp(-|i_{X;Y_{q*}}(X;Y) - log(γ / P_Ŝ(B_d(S)))|^+) | θ] + e^{1-γ}`
/// over `gamma_grid`, with i.i.d. codebook laws. The expectation depends on
/// θ only through its type.
pub fn theorem7_bound(inst: &GameInstance, inp: &Theorem7Inputs) -> Result<BoundReport> {
    check_grid(&inp.gamma_grid)?;
    let iota = letter_density(inst, inp)?;
    let (k, n) = (inst.k, inst.n);
    let fam = &inst.family;
    let reps = type_representatives(fam.t_size, n)?;
    let (xs, ys, ss) = (inst.x_space(), inst.y_space(), inst.s_space());
    let g = inp.gamma_grid.len() as f64;

    // (expectation, γ, θ-type index, ci)
    let best = match inp.eval {
        Evaluation::Exact => {
            let (sx, sy) = (xs.size_f64(), ys.size_f64());
            check_budget(
                "theorem 7 exact sum",
                ss.size_f64() * k as f64 * 4.0 + g * sx * sy * (ss.size_f64().min(64.0) + reps.len() as f64),
                inst.budget,
            )?;
            // group source sequences by their ball mass
            let p_s = inst.p_s_seq();
            let mut groups: Vec<(f64, f64)> = Vec::new();
            for (s, &ps) in p_s.iter().enumerate() {
                if ps == 0.0 {
                    continue;
                }
                let b = ball_mass(&ss.digits(s), &inp.p_shat, &inst.source, inst.budget)?.mass;
                let lb = if b > 0.0 { -b.log2() } else { f64::INFINITY };
                match groups.iter_mut().find(|(l, _)| *l == lb) {
                    Some(gp) => gp.1 += ps,
                    None => groups.push((lb, ps)),
                }
            }
            let (sx, sy) = (xs.size(), ys.size());
            let px = iid_weights(inp.p_x.probs(), n);
            let mut dens = vec![0.0; sx * sy];
            let (mut xd, mut yd) = (vec![0; n], vec![0; n]);
            for x in 0..sx {
                xs.decode(x, &mut xd);
                for y in 0..sy {
                    ys.decode(y, &mut yd);
                    dens[x * sy + y] = xd.iter().zip(&yd).map(|(&a, &b)| iota[a][b]).sum();
                }
            }
            let joints: Vec<Vec<f64>> = reps
                .iter()
                .map(|th| {
                    let mut v = vec![0.0; sx * sy];
                    for x in 0..sx {
                        if px[x] == 0.0 {
                            continue;
                        }
                        xs.decode(x, &mut xd);
                        for y in 0..sy {
                            ys.decode(y, &mut yd);
                            v[x * sy + y] = px[x] * (0..n).map(|i| fam.w(th[i], xd[i], yd[i])).product::<f64>();
                        }
                    }
                    v
                })
                .collect();
            let mut best = (f64::INFINITY, 0.0, 0usize, 0.0, 0.0);
            for &gamma in &inp.gamma_grid {
                let h: Vec<f64> = dens
                    .iter()
                    .map(|&i| groups.iter().map(|&(lb, m)| m * kernel(i, gamma, lb)).sum())
                    .collect();
                let mut worst = (f64::NEG_INFINITY, 0);
                for (ti, j) in joints.iter().enumerate() {
                    let e: f64 = j.iter().zip(&h).map(|(a, b)| a * b).sum();
                    if e > worst.0 {
                        worst = (e, ti);
                    }
                }
                let total = worst.0 + (1.0 - gamma).exp();
                if total < best.0 {
                    best = (total, gamma, worst.1, worst.0, 0.0);
                }
            }
            (best.3, best.1, best.2, None)
        }
        Evaluation::MonteCarlo { trials, seed } => {
            let trials = trials.max(2);
            let ps = WeightedIndex::new(inst.source.p_s.probs()).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
            let px = WeightedIndex::new(inp.p_x.probs()).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
            let rows: Vec<Vec<WeightedIndex<f64>>> = (0..fam.t_size)
                .map(|t| (0..fam.x_size).map(|a| WeightedIndex::new(fam.row(t, a)).expect("channel row")).collect())
                .collect();
            let mut cache: HashMap<Vec<usize>, f64> = HashMap::new();
            // samples of (i, lb) per θ type
            let mut samples: Vec<Vec<(f64, f64)>> = Vec::with_capacity(reps.len());
            for (ti, th) in reps.iter().enumerate() {
                let mut rng = ChaCha8Rng::seed_from_u64(seeding::mix(seed, ti as u64, 13));
                let mut v = Vec::with_capacity(trials);
                for _ in 0..trials {
                    let s: Vec<usize> = (0..k).map(|_| ps.sample(&mut rng)).collect();
                    let mut i = 0.0;
                    for &t in th.iter() {
                        let a = px.sample(&mut rng);
                        let b = rows[t][a].sample(&mut rng);
                        i += iota[a][b];
                    }
                    let lb = match cache.get(&s) {
                        Some(&l) => l,
                        None => {
                            let b = ball_mass(&s, &inp.p_shat, &inst.source, inst.budget)?.mass;
                            let l = if b > 0.0 { -b.log2() } else { f64::INFINITY };
                            cache.insert(s, l);
                            l
                        }
                    };
                    v.push((i, lb));
                }
                samples.push(v);
            }
            let m = trials as f64;
            let mut best = (f64::INFINITY, 0.0, 0usize, 0.0, 0.0);
            for &gamma in &inp.gamma_grid {
                let mut worst = (f64::NEG_INFINITY, 0, 0.0);
                for (ti, v) in samples.iter().enumerate() {
                    let (mut s1, mut s2) = (0.0, 0.0);
                    for &(i, lb) in v {
                        let z = kernel(i, gamma, lb);
                        s1 += z;
                        s2 += z * z;
                    }
                    let mean = s1 / m;
                    if mean > worst.0 {
                        worst = (mean, ti, ((s2 / m - mean * mean).max(0.0) / m).sqrt());
                    }
                }
                let total = worst.0 + (1.0 - gamma).exp();
                if total < best.0 {
                    best = (total, gamma, worst.1, worst.0, worst.2);
                }
            }
            (best.3, best.1, best.2, Some(1.96 * best.4))
        }
    };
    let (expectation, gamma, theta_type, ci) = best;
    let mut r = BoundReport::sum("t7", &[("expectation", expectation), ("tail", (1.0 - gamma).exp())])
        .detail("gamma", gamma)
        .detail("theta_type", theta_type as f64)
        .detail("k", k as f64)
        .detail("n", n as f64);
    r.mc_ci = ci;
    Ok(r)
}

/// `Γ(k) = c̄ log k + c + log(½ log k + 1)`.
pub fn big_gamma(k: f64, params: &BoundParams) -> f64 {
    let l = k.log2();
    params.cbar * l + params.c_const + (0.5 * l + 1.0).log2()
}

/// `Q((nC - kR - Γ(k)) / √(n V_C + k V_S)) + B/√(n+k) + (K0+2)/√k`.
pub fn theorem10_bound(n: f64, k: f64, so: &SecondOrder, params: &BoundParams) -> Result<BoundReport> {
    if !(n >= 1.0 && k >= 1.0) {
        return Err(Error::Parameter("theorem 10 needs n, k >= 1".into()));
    }
    let var = n * so.v_c_plus + k * so.v_s;
    if !(var > 0.0) {
        return Err(Error::Undefined("n V_C + k V_S must be positive".into()));
    }
    let gk = big_gamma(k, params);
    let arg = (n * so.c - k * so.r - gk) / var.sqrt();
    Ok(BoundReport::sum(
        "t10",
        &[
            ("gaussian", q_func(arg)),
            ("berry_esseen", params.b_const / (n + k).sqrt()),
            ("k0", (params.k0 + 2.0) / k.sqrt()),
        ],
    )
    .detail("argument", arg)
    .detail("big_gamma", gk)
    .detail("n", n)
    .detail("k", k)
    .with_params(params))
}
