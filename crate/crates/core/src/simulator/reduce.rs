//! Reduction of the random code to a uniform mixture of `K` sampled
//! deterministic codes, with exact per-state validation at tiny blocklengths.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::construct::{JsccSampler, RandomCodeSpec};
use crate::error::{Error, Result};
use crate::exactgame::payoff::det_error;
use crate::exactgame::{DeterministicCode, GameTables};
use crate::model::GameInstance;
use crate::seeding;

const ROLE_REDUCE: u64 = 41;
const ROLE_ENSEMBLE: u64 = 43;

/// Smallest integer `K > n ln|T| / (e - ln(1 + e))`.
pub fn cond_k(t_size: usize, n: usize, target: f64) -> Result<usize> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::Parameter(format!("target error {target} must lie in (0, 1]")));
    }
    if t_size == 0 {
        return Err(Error::Parameter("state alphabet is empty".into()));
    }
    let bound = n as f64 * (t_size as f64).ln() / (target - target.ln_1p());
    if bound >= 1e9 {
        return Err(Error::Parameter(format!("required K {bound:.3e} is too large")));
    }
    Ok(bound.floor() as usize + 1)
}

/// Exact error of one deterministic code against every state sequence.
pub fn per_theta_errors(t: &GameTables, code: &DeterministicCode) -> Vec<f64> {
    t.w.iter().map(|w| det_error(t, code, w)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleError {
    /// Average exact error over the sampled codes, per state sequence.
    pub per_theta: Vec<f64>,
    /// `max_θ per_theta[θ]`.
    pub value: f64,
    pub worst_theta: usize,
    pub samples: usize,
}

fn argmax(v: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &x) in v.iter().enumerate() {
        if x > best.1 {
            best = (i, x);
        }
    }
    best
}

fn average_errors(t: &GameTables, codes: &[DeterministicCode]) -> Vec<f64> {
    let sums = codes
        .par_iter()
        .map(|c| per_theta_errors(t, c))
        .reduce(|| vec![0.0; t.nt], |mut a, b| {
            a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
            a
        });
    sums.into_iter().map(|v| v / codes.len() as f64).collect()
}

/// Estimate of the ensemble error `e_d(ψ) = max_θ E[e_θ(f, φ)]`, averaging
/// the exact per-code errors of `samples` codes drawn under `seed`.
pub fn ensemble_error(inst: &GameInstance, spec: &RandomCodeSpec, samples: usize, seed: u64) -> Result<EnsembleError> {
    if samples == 0 {
        return Err(Error::Parameter("need at least one sampled code".into()));
    }
    let sampler = JsccSampler::new(inst, spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seeding::mix(seed, 0, ROLE_ENSEMBLE));
    let codes: Vec<DeterministicCode> = (0..samples).map(|_| sampler.sample(&mut rng).code).collect();
    let per_theta = average_errors(&sampler.tables, &codes);
    let (worst_theta, value) = argmax(&per_theta);
    Ok(EnsembleError {
        per_theta,
        value,
        worst_theta,
        samples,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Validation {
    pub passed: bool,
    pub target: f64,
    /// Draw (0-based) of the returned codes.
    pub attempts: usize,
    pub worst_theta: usize,
    pub worst_average: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReducedEnsemble {
    pub codes: Vec<DeterministicCode>,
    pub k: usize,
    pub validation: Option<Validation>,
}

impl ReducedEnsemble {
    pub fn new(codes: Vec<DeterministicCode>) -> Result<Self> {
        if codes.is_empty() {
            return Err(Error::Parameter("an ensemble needs at least one code".into()));
        }
        Ok(Self {
            k: codes.len(),
            codes,
            validation: None,
        })
    }

    /// `(1/K) Σ_i e_θ(f_i, φ_i)` for every θ.
    pub fn per_theta_average(&self, inst: &GameInstance) -> Result<Vec<f64>> {
        let t = GameTables::new(inst)?;
        for c in &self.codes {
            t.check_code(c)?;
        }
        Ok(average_errors(&t, &self.codes))
    }
}

/// Samples `k_codes` codes. With a `target`, checks
/// `(1/K) Σ_i e_θ(f_i, φ_i) < target` for every θ and redraws the whole set up
/// to `retries` more times; the last draw is returned either way.
pub fn reduce_random_code(
    inst: &GameInstance,
    spec: &RandomCodeSpec,
    k_codes: usize,
    retries: usize,
    target: Option<f64>,
) -> Result<ReducedEnsemble> {
    if k_codes == 0 {
        return Err(Error::Parameter("K must be at least 1".into()));
    }
    let sampler = JsccSampler::new(inst, spec)?;
    let draw = |attempt: usize| -> Vec<DeterministicCode> {
        let mut rng = ChaCha8Rng::seed_from_u64(seeding::mix(spec.seed, attempt as u64, ROLE_REDUCE));
        (0..k_codes).map(|_| sampler.sample(&mut rng).code).collect()
    };
    let Some(target) = target else {
        return ReducedEnsemble::new(draw(0));
    };
    let mut attempt = 0;
    loop {
        let codes = draw(attempt);
        let avg = average_errors(&sampler.tables, &codes);
        let (worst_theta, worst_average) = argmax(&avg);
        let passed = worst_average < target;
        if passed || attempt >= retries {
            return Ok(ReducedEnsemble {
                k: k_codes,
                codes,
                validation: Some(Validation {
                    passed,
                    target,
                    attempts: attempt,
                    worst_theta,
                    worst_average,
                }),
            });
        }
        attempt += 1;
    }
}
