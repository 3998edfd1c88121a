//! The payoff `P(d(S, Ŝ) > d)` of a code against a jammer.

use serde::{Deserialize, Serialize};

use super::code::{DeterministicCode, GameTables, StochasticCode};
use crate::error::{Error, Result};
use crate::model::GameInstance;

/// Ties closer than this are broken towards the lower code index.
pub const TIE_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Code {
    Deterministic(DeterministicCode),
    Stochastic(StochasticCode),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Jam {
    /// A single state sequence by flat index.
    State(usize),
    /// A law over state sequences.
    Mixed(Vec<f64>),
}

impl Jam {
    fn channel(&self, t: &GameTables) -> Result<Vec<f64>> {
        match self {
            Jam::State(th) => t
                .w
                .get(*th)
                .cloned()
                .ok_or_else(|| Error::Dimension(format!("state sequence {th} out of range"))),
            Jam::Mixed(q) => {
                if q.len() != t.nt {
                    return Err(Error::Dimension(format!("jammer law has {} entries, expected {}", q.len(), t.nt)));
                }
                let s: f64 = q.iter().sum();
                if q.iter().any(|v| *v < 0.0 || !v.is_finite()) || (s - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidDistribution("jammer law".into()));
                }
                Ok(t.averaged(q))
            }
        }
    }
}

/// Exact error probability of a deterministic code through a sequence channel `w[x*ny+y]`.
pub fn det_error(t: &GameTables, code: &DeterministicCode, w: &[f64]) -> f64 {
    let mut e = 0.0;
    for (s, &x) in code.enc.iter().enumerate() {
        let ps = t.p_s[s];
        if ps == 0.0 {
            continue;
        }
        let row = &w[x * t.ny..(x + 1) * t.ny];
        let mut acc = 0.0;
        for (y, &wy) in row.iter().enumerate() {
            if t.is_err(s, code.dec[y]) {
                acc += wy;
            }
        }
        e += ps * acc;
    }
    e
}

pub fn stochastic_error(t: &GameTables, code: &StochasticCode, w: &[f64]) -> f64 {
    // per y, the probability that the decoder lands outside the ball of s
    let mut miss = vec![0.0; t.ny * t.ns];
    for y in 0..t.ny {
        for s in 0..t.ns {
            miss[y * t.ns + s] = (0..t.ns)
                .filter(|&sh| t.is_err(s, sh))
                .map(|sh| code.dec[y * t.ns + sh])
                .sum();
        }
    }
    let mut e = 0.0;
    for s in 0..t.ns {
        let ps = t.p_s[s];
        if ps == 0.0 {
            continue;
        }
        for x in 0..t.nx {
            let qx = code.enc[s * t.nx + x];
            if qx == 0.0 {
                continue;
            }
            let row = &w[x * t.ny..(x + 1) * t.ny];
            let acc: f64 = row.iter().enumerate().map(|(y, wy)| wy * miss[y * t.ns + s]).sum();
            e += ps * qx * acc;
        }
    }
    e
}

pub fn error_probability(inst: &GameInstance, code: &Code, jam: &Jam) -> Result<f64> {
    let t = GameTables::new(inst)?;
    let w = jam.channel(&t)?;
    Ok(match code {
        Code::Deterministic(c) => {
            t.check_code(c)?;
            det_error(&t, c, &w)
        }
        Code::Stochastic(c) => {
            t.check_stochastic(c)?;
            stochastic_error(&t, c, &w)
        }
    })
}

/// Error of a deterministic code against every state sequence.
pub fn payoff_row(t: &GameTables, code: &DeterministicCode) -> Vec<f64> {
    t.w.iter().map(|w| det_error(t, code, w)).collect()
}

/// Best deterministic code against the averaged channel `w`, with ties going
/// to the lowest flat index.
pub fn best_response(t: &GameTables, w: &[f64]) -> (f64, DeterministicCode) {
    // a[(s * nx + x) * ny + y] = P(s) W(y|x)
    let mut a = vec![0.0; t.ns * t.nx * t.ny];
    for s in 0..t.ns {
        for x in 0..t.nx {
            for y in 0..t.ny {
                a[(s * t.nx + x) * t.ny + y] = t.p_s[s] * w[x * t.ny + y];
            }
        }
    }
    let mut enc = vec![0usize; t.ns];
    let mut best = f64::INFINITY;
    let mut best_code = DeterministicCode {
        enc: enc.clone(),
        dec: vec![0; t.ny],
    };
    let mut dec = vec![0usize; t.ny];
    let mut cost = vec![0.0; t.ns];
    loop {
        let mut total = 0.0;
        for (y, slot) in dec.iter_mut().enumerate() {
            cost.iter_mut().for_each(|c| *c = 0.0);
            for (s, &x) in enc.iter().enumerate() {
                let v = a[(s * t.nx + x) * t.ny + y];
                if v == 0.0 {
                    continue;
                }
                for (sh, c) in cost.iter_mut().enumerate() {
                    if t.is_err(s, sh) {
                        *c += v;
                    }
                }
            }
            let (mut arg, mut m) = (0, cost[0]);
            for (sh, &c) in cost.iter().enumerate().skip(1) {
                if c < m - TIE_TOL {
                    m = c;
                    arg = sh;
                }
            }
            *slot = arg;
            total += m;
        }
        if total < best - TIE_TOL {
            best = total;
            best_code = DeterministicCode {
                enc: enc.clone(),
                dec: dec.clone(),
            };
        }
        // odometer, last digit fastest
        let mut i = t.ns;
        loop {
            if i == 0 {
                return (best, best_code);
            }
            i -= 1;
            enc[i] += 1;
            if enc[i] < t.nx {
                break;
            }
            enc[i] = 0;
        }
    }
}
