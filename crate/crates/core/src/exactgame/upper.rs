//! Local search for the upper value `min_{stochastic codes} max_θ payoff`.
//!
//! The objective is bilinear in the encoder and decoder laws, so each half
//! step (encoder with the decoder fixed, and the reverse) is an LP with the
//! maximum over state sequences written as a finite set of constraints.
//! Every value returned is attained by an explicit code, hence an upper bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::code::{GameTables, StochasticCode};
use super::payoff::stochastic_error;
use crate::error::Result;
use crate::lp::{LinearProgram, Relation, Sense};
use crate::seeding;

pub const DEFAULT_STARTS: usize = 32;
pub const MAX_ROUNDS: usize = 200;
pub const MIN_IMPROVEMENT: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct UpperEstimate {
    pub value: f64,
    pub code: StochasticCode,
    /// Index of the start that produced `value`.
    pub best_start: usize,
    pub starts: usize,
    pub rounds: usize,
}

pub fn worst_case(t: &GameTables, code: &StochasticCode) -> f64 {
    t.w.iter().map(|w| stochastic_error(t, code, w)).fold(0.0, f64::max)
}

/// Minimise `max_θ Σ_j c_θ[j] z_j` over row-stochastic `z` with `rows` rows of
/// width `width`.
fn minmax_lp(coeffs: &[Vec<f64>], rows: usize, width: usize) -> Result<(f64, Vec<f64>)> {
    let nv = rows * width;
    let mut lp = LinearProgram::new(Sense::Minimize, nv + 1);
    lp.set_cost(nv, 1.0);
    lp.set_free(nv);
    for r in 0..rows {
        lp.add_constraint((0..width).map(|c| (r * width + c, 1.0)).collect(), Relation::Eq, 1.0);
    }
    for c in coeffs {
        let mut row: Vec<(usize, f64)> = c.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, &v)| (j, v)).collect();
        row.push((nv, -1.0));
        lp.add_constraint(row, Relation::Le, 0.0);
    }
    let sol = lp.solve()?;
    let mut z: Vec<f64> = sol.x[..nv].iter().map(|v| v.max(0.0)).collect();
    for r in z.chunks_mut(width) {
        let s: f64 = r.iter().sum();
        r.iter_mut().for_each(|v| *v /= s);
    }
    Ok((sol.objective, z))
}

fn encoder_step(t: &GameTables, code: &StochasticCode) -> Result<Vec<f64>> {
    let mut miss = vec![0.0; t.ny * t.ns];
    for y in 0..t.ny {
        for s in 0..t.ns {
            miss[y * t.ns + s] = (0..t.ns).filter(|&sh| t.is_err(s, sh)).map(|sh| code.dec[y * t.ns + sh]).sum();
        }
    }
    let coeffs: Vec<Vec<f64>> = t
        .w
        .iter()
        .map(|w| {
            let mut c = vec![0.0; t.ns * t.nx];
            for s in 0..t.ns {
                for x in 0..t.nx {
                    let acc: f64 = (0..t.ny).map(|y| w[x * t.ny + y] * miss[y * t.ns + s]).sum();
                    c[s * t.nx + x] = t.p_s[s] * acc;
                }
            }
            c
        })
        .collect();
    Ok(minmax_lp(&coeffs, t.ns, t.nx)?.1)
}

fn decoder_step(t: &GameTables, code: &StochasticCode) -> Result<Vec<f64>> {
    let coeffs: Vec<Vec<f64>> = t
        .w
        .iter()
        .map(|w| {
            // joint mass of (s, y) under the current encoder
            let mut c = vec![0.0; t.ny * t.ns];
            for s in 0..t.ns {
                if t.p_s[s] == 0.0 {
                    continue;
                }
                for y in 0..t.ny {
                    let m: f64 = (0..t.nx).map(|x| code.enc[s * t.nx + x] * w[x * t.ny + y]).sum::<f64>() * t.p_s[s];
                    if m == 0.0 {
                        continue;
                    }
                    for sh in 0..t.ns {
                        if t.is_err(s, sh) {
                            c[y * t.ns + sh] += m;
                        }
                    }
                }
            }
            c
        })
        .collect();
    Ok(minmax_lp(&coeffs, t.ny, t.ns)?.1)
}

/// Alternating LP descent from one start. Returns the best value seen, its
/// code and the number of rounds.
pub fn descend(t: &GameTables, mut code: StochasticCode) -> Result<(f64, StochasticCode, usize)> {
    let mut best = worst_case(t, &code);
    let mut best_code = code.clone();
    let mut rounds = 0;
    while rounds < MAX_ROUNDS {
        code.enc = encoder_step(t, &code)?;
        code.dec = decoder_step(t, &code)?;
        rounds += 1;
        let v = worst_case(t, &code);
        let improvement = best - v;
        if v < best {
            best = v;
            best_code = code.clone();
        }
        if improvement < MIN_IMPROVEMENT {
            break;
        }
    }
    Ok((best, best_code, rounds))
}

fn random_code(t: &GameTables, rng: &mut ChaCha8Rng) -> StochasticCode {
    let mut draw = |rows: usize, width: usize| {
        let mut v: Vec<f64> = (0..rows * width).map(|_| rng.random_range(0.01..1.0)).collect();
        for r in v.chunks_mut(width) {
            let s: f64 = r.iter().sum();
            r.iter_mut().for_each(|x| *x /= s);
        }
        v
    };
    let enc = draw(t.ns, t.nx);
    let dec = draw(t.ny, t.ns);
    StochasticCode { enc, dec }
}

/// Multistart upper-value search. Start 0 is the uniform code, start 1 the
/// warm start when given, the rest are seeded random interior codes. With
/// `starts == 0` the uniform code is only evaluated.
pub fn upper_value_estimate(t: &GameTables, starts: usize, seed: u64, warm: Option<StochasticCode>) -> Result<UpperEstimate> {
    if starts == 0 {
        let code = t.uniform_code();
        return Ok(UpperEstimate {
            value: worst_case(t, &code),
            code,
            best_start: 0,
            starts: 0,
            rounds: 0,
        });
    }
    let inits: Vec<StochasticCode> = (0..starts)
        .map(|i| match (i, &warm) {
            (0, _) => t.uniform_code(),
            (1, Some(w)) => w.clone(),
            _ => random_code(t, &mut ChaCha8Rng::seed_from_u64(seeding::mix(seed, i as u64, 1))),
        })
        .collect();
    let runs: Vec<(f64, StochasticCode, usize)> = inits
        .into_par_iter()
        .map(|c| descend(t, c))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.0 < runs[best].0 {
            best = i;
        }
    }
    let rounds = runs.iter().map(|r| r.2).sum();
    let (value, code, _) = runs.into_iter().nth(best).expect("at least one start");
    Ok(UpperEstimate {
        value: value.clamp(0.0, 1.0),
        code,
        best_start: best,
        starts,
        rounds,
    })
}
