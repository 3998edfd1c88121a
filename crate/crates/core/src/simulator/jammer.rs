//! Jammer strategies. The payoff is linear in the state law, so a
//! deterministic sequence is always a best response; the greedy search looks
//! for one by coordinate ascent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactgame::payoff::det_error;
use crate::exactgame::{DeterministicCode, GameTables};
use crate::model::{Dist, GameInstance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JammerKind {
    /// Each letter drawn independently from the law.
    Iid(Dist),
    /// One state sequence, reused in every trial.
    Fixed(Vec<usize>),
    /// Coordinate ascent on the exact error, with at most `budget` evaluations.
    GreedySearch { budget: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JammerStrategy {
    pub kind: JammerKind,
    #[serde(default)]
    pub seed: u64,
}

impl JammerStrategy {
    pub fn iid(q: Dist) -> Self {
        Self { kind: JammerKind::Iid(q), seed: 0 }
    }

    pub fn fixed(theta: Vec<usize>) -> Self {
        Self { kind: JammerKind::Fixed(theta), seed: 0 }
    }

    pub fn greedy(budget: usize) -> Self {
        Self {
            kind: JammerKind::GreedySearch { budget },
            seed: 0,
        }
    }

    /// Checks the strategy against the state alphabet and the number of jammed letters.
    pub fn validate(&self, t_size: usize, len: usize) -> Result<()> {
        match &self.kind {
            JammerKind::Iid(q) if q.len() != t_size => {
                Err(Error::Dimension(format!("jammer law has {} letters, expected {t_size}", q.len())))
            }
            JammerKind::Fixed(th) if th.len() != len || th.iter().any(|&t| t >= t_size) => Err(Error::Dimension(
                format!("fixed state sequence must have {len} letters below {t_size}"),
            )),
            JammerKind::GreedySearch { budget } if *budget < t_size * len => Err(Error::Parameter(format!(
                "greedy budget {budget} is below one coordinate pass ({})",
                t_size * len
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreedyResult {
    pub theta: Vec<usize>,
    pub error: f64,
    pub evaluations: usize,
    /// True when the last full pass found no improving single-letter change,
    /// so `theta` is a local maximum.
    pub converged: bool,
}

/// Coordinate ascent over `len` letters from `{0..t_size}` maximising
/// `error`. Starts from the best constant sequence and accepts only strict
/// improvements, so ties keep the earlier sequence.
pub fn greedy_search<F>(t_size: usize, len: usize, budget: usize, mut error: F) -> Result<GreedyResult>
where
    F: FnMut(&[usize]) -> Result<f64>,
{
    if t_size == 0 || len == 0 {
        return Err(Error::Parameter("greedy search needs a nonempty alphabet and length".into()));
    }
    if budget < t_size * len {
        return Err(Error::Parameter(format!(
            "greedy budget {budget} is below one coordinate pass ({})",
            t_size * len
        )));
    }
    let mut evals = 0;
    let mut theta = vec![0; len];
    let mut best = f64::NEG_INFINITY;
    for t in 0..t_size {
        let cand = vec![t; len];
        let e = error(&cand)?;
        evals += 1;
        if e > best {
            best = e;
            theta = cand;
        }
    }
    loop {
        let mut improved = false;
        for i in 0..len {
            for t in 0..t_size {
                if t == theta[i] {
                    continue;
                }
                if evals >= budget {
                    return Ok(GreedyResult {
                        theta,
                        error: best,
                        evaluations: evals,
                        converged: false,
                    });
                }
                let old = theta[i];
                theta[i] = t;
                let e = error(&theta)?;
                evals += 1;
                if e > best {
                    best = e;
                    improved = true;
                } else {
                    theta[i] = old;
                }
            }
        }
        if !improved {
            return Ok(GreedyResult {
                theta,
                error: best,
                evaluations: evals,
                converged: true,
            });
        }
    }
}

/// Greedy jammer against a deterministic code, using its exact error.
pub fn greedy_jammer(inst: &GameInstance, code: &DeterministicCode, budget: usize) -> Result<GreedyResult> {
    let t = GameTables::new(inst)?;
    t.check_code(code)?;
    let ts = inst.t_space();
    greedy_search(inst.family.t_size, inst.n, budget, |th| Ok(det_error(&t, code, &t.w[ts.encode(th)])))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_a_separable_maximum() {
        // error = Σ_i [θ_i == i mod 3]
        let r = greedy_search(3, 4, 100, |th| Ok(th.iter().enumerate().filter(|(i, &t)| t == i % 3).count() as f64)).unwrap();
        assert_eq!(r.theta, vec![0, 1, 2, 0]);
        assert!(r.converged);
    }

    #[test]
    fn budget_below_one_pass_is_rejected() {
        assert!(greedy_search(2, 3, 5, |_| Ok(0.0)).is_err());
    }
}
