//! Monte Carlo transmission: a fixed deterministic code, a fresh draw from
//! the random code per trial, or the stochastic code that sends a uniformly
//! chosen ensemble index through a prefix code ahead of the payload.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::construct::{JsccSampler, RandomCodeSpec};
use super::jammer::{greedy_jammer, greedy_search, GreedyResult, JammerKind, JammerStrategy};
use super::reduce::{ensemble_error, ReducedEnsemble};
use crate::error::{Error, Result};
use crate::exactgame::{DeterministicCode, GameTables};
use crate::model::instance::product_channel;
use crate::model::seq::{check_budget, seq_distortion};
use crate::model::{ChannelFamily, GameInstance, SeqSpace};
use crate::seeding;

const ROLE_TRIAL: u64 = 51;
const Z95: f64 = 1.959_963_984_540_054;

/// Codes averaged by the greedy jammer's oracle for the random code.
pub const ORACLE_CODES: usize = 200;

/// Wilson score interval at the given normal quantile.
pub fn wilson_interval(errors: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if errors == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if errors == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranscriptRow {
    pub trial: usize,
    /// Ensemble index for the stochastic code, the trial for fresh random
    /// codes, 0 for a single code.
    pub i: usize,
    pub s: String,
    pub theta: String,
    pub s_hat: String,
    pub distortion: f64,
    pub error: bool,
}

impl TranscriptRow {
    pub const HEADER: &'static str = "trial,i,s,theta,s_hat,distortion,error_flag";

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.trial, self.i, self.s, self.theta, self.s_hat, self.distortion, self.error as u8
        )
    }
}

fn seq_string(digits: &[usize], radix: usize) -> String {
    if radix <= 10 {
        digits.iter().map(|d| char::from(b'0' + *d as u8)).collect()
    } else {
        digits.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(".")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimReport {
    pub trials: usize,
    pub errors: usize,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub ci_half_width: f64,
    /// The state sequence used in every trial, for fixed and greedy jammers.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub greedy: Option<GreedyResult>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub transcript: Vec<TranscriptRow>,
}

impl SimReport {
    fn new(trials: usize, outcomes: Vec<(bool, Option<TranscriptRow>)>, theta: Option<Vec<usize>>, greedy: Option<GreedyResult>) -> Self {
        let errors = outcomes.iter().filter(|o| o.0).count();
        let (lo, hi) = wilson_interval(errors, trials, Z95);
        Self {
            trials,
            errors,
            estimate: errors as f64 / trials as f64,
            ci_low: lo,
            ci_high: hi,
            ci_half_width: (hi - lo) / 2.0,
            theta,
            greedy,
            transcript: outcomes.into_iter().filter_map(|o| o.1).collect(),
        }
    }
}

/// Per-letter samplers shared by all trials.
struct Letters {
    source: WeightedIndex<f64>,
    /// `rows[t][a]` samples `W(·|a, t)`.
    rows: Vec<Vec<WeightedIndex<f64>>>,
    x_size: usize,
    y_size: usize,
    s_size: usize,
}

impl Letters {
    fn new(inst: &GameInstance) -> Result<Self> {
        let fam = &inst.family;
        let bad = |e: rand::distr::weighted::Error| Error::InvalidDistribution(e.to_string());
        let rows = (0..fam.t_size)
            .map(|t| (0..fam.x_size).map(|a| WeightedIndex::new(fam.row(t, a)).map_err(bad)).collect())
            .collect::<Result<_>>()?;
        Ok(Self {
            source: WeightedIndex::new(inst.source.p_s.probs()).map_err(bad)?,
            rows,
            x_size: fam.x_size,
            y_size: fam.y_size,
            s_size: inst.source.size(),
        })
    }

    fn draw_source<R: Rng>(&self, k: usize, rng: &mut R) -> usize {
        (0..k).fold(0, |acc, _| acc * self.s_size + self.source.sample(rng))
    }

    /// Passes the flat input `x` of `theta.len()` letters through the channel.
    fn pass<R: Rng>(&self, x: usize, theta: &[usize], rng: &mut R) -> usize {
        let xs = SeqSpace::new(self.x_size, theta.len());
        let xd = xs.digits(x);
        xd.iter()
            .zip(theta)
            .fold(0, |acc, (&a, &t)| acc * self.y_size + self.rows[t][a].sample(rng))
    }
}

enum StateDraw {
    Fixed(Vec<usize>),
    Iid(WeightedIndex<f64>),
}

impl StateDraw {
    fn draw<R: Rng>(&self, len: usize, rng: &mut R) -> Vec<usize> {
        match self {
            StateDraw::Fixed(th) => th.clone(),
            StateDraw::Iid(w) => (0..len).map(|_| w.sample(rng)).collect(),
        }
    }

    fn fixed(&self) -> Option<Vec<usize>> {
        match self {
            StateDraw::Fixed(th) => Some(th.clone()),
            StateDraw::Iid(_) => None,
        }
    }
}

/// Resolves a strategy over `len` letters; the greedy case calls `oracle`.
fn resolve<F>(jam: &JammerStrategy, t_size: usize, len: usize, oracle: F) -> Result<(StateDraw, Option<GreedyResult>)>
where
    F: FnOnce(usize) -> Result<GreedyResult>,
{
    jam.validate(t_size, len)?;
    Ok(match &jam.kind {
        JammerKind::Fixed(th) => (StateDraw::Fixed(th.clone()), None),
        JammerKind::Iid(q) => (
            StateDraw::Iid(WeightedIndex::new(q.probs()).map_err(|e| Error::InvalidDistribution(e.to_string()))?),
            None,
        ),
        JammerKind::GreedySearch { budget } => {
            let g = oracle(*budget)?;
            (StateDraw::Fixed(g.theta.clone()), Some(g))
        }
    })
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::Parameter("need at least one trial".into()));
    }
    Ok(())
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seeding::mix(seed, trial as u64, ROLE_TRIAL))
}

struct RowContext<'a> {
    inst: &'a GameInstance,
    ss: SeqSpace,
    t_size: usize,
}

impl RowContext<'_> {
    fn row(&self, trial: usize, i: usize, s: usize, theta: &[usize], sh: usize, error: bool) -> Result<TranscriptRow> {
        let (a, b) = (self.ss.digits(s), self.ss.digits(sh));
        Ok(TranscriptRow {
            trial,
            i,
            s: seq_string(&a, self.ss.radix),
            theta: seq_string(theta, self.t_size),
            s_hat: seq_string(&b, self.ss.radix),
            distortion: seq_distortion(&a, &b, &self.inst.source)?,
            error,
        })
    }
}

/// Empirical error of one deterministic code. The first `transcript_limit`
/// trials are recorded.
pub fn simulate_code(
    inst: &GameInstance,
    code: &DeterministicCode,
    jam: &JammerStrategy,
    trials: usize,
    seed: u64,
    transcript_limit: usize,
) -> Result<SimReport> {
    check_trials(trials)?;
    let t = GameTables::new(inst)?;
    t.check_code(code)?;
    let letters = Letters::new(inst)?;
    let (states, greedy) = resolve(jam, inst.family.t_size, inst.n, |b| greedy_jammer(inst, code, b))?;
    let ctx = RowContext {
        inst,
        ss: inst.s_space(),
        t_size: inst.family.t_size,
    };
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|tr| {
            let mut rng = trial_rng(seed, tr);
            let s = letters.draw_source(inst.k, &mut rng);
            let theta = states.draw(inst.n, &mut rng);
            let y = letters.pass(code.enc[s], &theta, &mut rng);
            let sh = code.dec[y];
            let err = t.is_err(s, sh);
            let row = if tr < transcript_limit { Some(ctx.row(tr, 0, s, &theta, sh, err)?) } else { None };
            Ok((err, row))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimReport::new(trials, outcomes, states.fixed(), greedy))
}

/// Empirical error of the random code: every trial draws a fresh code.
/// The greedy jammer maximises the exact errors averaged over
/// [`ORACLE_CODES`] codes drawn under the jammer's seed.
pub fn random_code_transmit(
    inst: &GameInstance,
    spec: &RandomCodeSpec,
    jam: &JammerStrategy,
    trials: usize,
    seed: u64,
    transcript_limit: usize,
) -> Result<SimReport> {
    check_trials(trials)?;
    let sampler = JsccSampler::new(inst, spec)?;
    let letters = Letters::new(inst)?;
    let ts = inst.t_space();
    let (states, greedy) = resolve(jam, inst.family.t_size, inst.n, |b| {
        let est = ensemble_error(inst, spec, ORACLE_CODES, jam.seed)?;
        greedy_search(inst.family.t_size, inst.n, b, |th| Ok(est.per_theta[ts.encode(th)]))
    })?;
    let ctx = RowContext {
        inst,
        ss: inst.s_space(),
        t_size: inst.family.t_size,
    };
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|tr| {
            let mut rng = trial_rng(seed, tr);
            let code = sampler.sample(&mut rng).code;
            let s = letters.draw_source(inst.k, &mut rng);
            let theta = states.draw(inst.n, &mut rng);
            let y = letters.pass(code.enc[s], &theta, &mut rng);
            let sh = code.dec[y];
            let err = sampler.tables.is_err(s, sh);
            let row = if tr < transcript_limit { Some(ctx.row(tr, tr, s, &theta, sh, err)?) } else { None };
            Ok((err, row))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimReport::new(trials, outcomes, states.fixed(), greedy))
}

/// Deterministic code for the ensemble index over `d_n` channel letters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrefixCode {
    pub d_n: usize,
    /// Flat input sequence for each index.
    pub enc: Vec<usize>,
    /// Decoded index for each flat output sequence.
    pub dec: Vec<usize>,
}

impl PrefixCode {
    pub fn new(family: &ChannelFamily, d_n: usize, enc: Vec<usize>, dec: Vec<usize>) -> Result<Self> {
        let nx = SeqSpace::new(family.x_size, d_n).checked_size();
        let ny = SeqSpace::new(family.y_size, d_n).checked_size();
        let (Some(nx), Some(ny)) = (nx, ny) else {
            return Err(Error::Parameter("prefix blocklength too large".into()));
        };
        if d_n == 0 || enc.is_empty() || dec.len() != ny {
            return Err(Error::Dimension(format!("prefix code needs d_n >= 1, a nonempty encoder and {ny} decoder entries")));
        }
        if enc.iter().any(|&x| x >= nx) || dec.iter().any(|&i| i >= enc.len()) {
            return Err(Error::Dimension("prefix code entry out of range".into()));
        }
        Ok(Self { d_n, enc, dec })
    }

    pub fn k(&self) -> usize {
        self.enc.len()
    }

    /// Injective code for `k_codes` indices: codewords chosen greedily by
    /// largest Hamming distance to those already chosen (lowest index on
    /// ties), decoded by minimum Hamming distance when input and output
    /// alphabets coincide and by maximum likelihood under the uniform state
    /// mixture otherwise. Decoder ties go to the lowest index.
    pub fn min_distance(family: &ChannelFamily, k_codes: usize, d_n: usize, budget: f64) -> Result<Self> {
        let xs = SeqSpace::new(family.x_size, d_n);
        let ys = SeqSpace::new(family.y_size, d_n);
        if k_codes == 0 || d_n == 0 {
            return Err(Error::Parameter("prefix code needs K >= 1 and d_n >= 1".into()));
        }
        if xs.size_f64() < k_codes as f64 {
            return Err(Error::Parameter(format!(
                "{} input sequences cannot carry {k_codes} indices injectively",
                xs.size_f64()
            )));
        }
        check_budget("prefix code construction", (xs.size_f64() + ys.size_f64()) * k_codes as f64 * d_n as f64, budget)?;
        let nx = xs.size();
        let hamming = |a: &[usize], b: &[usize]| a.iter().zip(b).filter(|(x, y)| x != y).count();
        let words: Vec<Vec<usize>> = (0..nx).map(|x| xs.digits(x)).collect();
        let mut enc = vec![0usize];
        let mut near: Vec<usize> = words.iter().map(|w| hamming(w, &words[0])).collect();
        while enc.len() < k_codes {
            let mut best = (0usize, 0usize);
            for (x, &d) in near.iter().enumerate() {
                if d > best.1 {
                    best = (x, d);
                }
            }
            let x = best.0;
            enc.push(x);
            for (w, slot) in words.iter().zip(near.iter_mut()) {
                *slot = (*slot).min(hamming(w, &words[x]));
            }
        }
        let uniform = family.averaged(&vec![1.0 / family.t_size as f64; family.t_size])?;
        let dec = (0..ys.size())
            .map(|y| {
                let yd = ys.digits(y);
                let mut best = (f64::NEG_INFINITY, 0);
                for (i, &x) in enc.iter().enumerate() {
                    let score = if family.x_size == family.y_size {
                        -(hamming(&words[x], &yd) as f64)
                    } else {
                        words[x].iter().zip(&yd).map(|(&a, &b)| uniform.get(a, b)).product()
                    };
                    if score > best.0 {
                        best = (score, i);
                    }
                }
                best.1
            })
            .collect();
        Self::new(family, d_n, enc, dec)
    }
}

/// Exact error of the stochastic code `(prefix, ensemble)` for a state
/// sequence over `d_n + n` letters.
pub fn stochastic_code_error(
    t: &GameTables,
    family: &ChannelFamily,
    ensemble: &ReducedEnsemble,
    prefix: &PrefixCode,
    theta: &[usize],
) -> f64 {
    let d = prefix.d_n;
    let pre = product_channel(family, &theta[..d]);
    let pay = product_channel(family, &theta[d..]);
    let ny_pre = prefix.dec.len();
    let k = ensemble.codes.len();
    let mut total = 0.0;
    for (i, &xi) in prefix.enc.iter().enumerate() {
        let mut p_j = vec![0.0; k];
        for (y, &j) in prefix.dec.iter().enumerate() {
            p_j[j] += pre[xi * ny_pre + y];
        }
        let fi = &ensemble.codes[i];
        for (j, &pj) in p_j.iter().enumerate() {
            if pj == 0.0 {
                continue;
            }
            let phi = &ensemble.codes[j].dec;
            let mut e = 0.0;
            for (s, &x) in fi.enc.iter().enumerate() {
                let ps = t.p_s[s];
                if ps == 0.0 {
                    continue;
                }
                let row = &pay[x * t.ny..(x + 1) * t.ny];
                e += ps * row.iter().zip(phi).filter(|(_, &sh)| t.is_err(s, sh)).map(|(w, _)| w).sum::<f64>();
            }
            total += pj * e;
        }
    }
    total / k as f64
}

/// Empirical error of the stochastic code: draw `i` uniformly, send
/// `(f̃(i), f_i(s))` over `d_n + n` jammed letters, decode the prefix to `j`
/// and the payload with `φ_j`.
pub fn stochastic_code_transmit(
    inst: &GameInstance,
    ensemble: &ReducedEnsemble,
    prefix: &PrefixCode,
    jam: &JammerStrategy,
    trials: usize,
    seed: u64,
    transcript_limit: usize,
) -> Result<SimReport> {
    check_trials(trials)?;
    if prefix.k() != ensemble.codes.len() {
        return Err(Error::Dimension(format!(
            "prefix code carries {} indices but the ensemble has {} codes",
            prefix.k(),
            ensemble.codes.len()
        )));
    }
    let fam = &inst.family;
    PrefixCode::new(fam, prefix.d_n, prefix.enc.clone(), prefix.dec.clone())?;
    let t = GameTables::new(inst)?;
    for c in &ensemble.codes {
        t.check_code(c)?;
    }
    let letters = Letters::new(inst)?;
    let (d, n) = (prefix.d_n, inst.n);
    let (states, greedy) = resolve(jam, fam.t_size, d + n, |b| {
        greedy_search(fam.t_size, d + n, b, |th| Ok(stochastic_code_error(&t, fam, ensemble, prefix, th)))
    })?;
    let ctx = RowContext {
        inst,
        ss: inst.s_space(),
        t_size: fam.t_size,
    };
    let k = ensemble.codes.len();
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|tr| {
            let mut rng = trial_rng(seed, tr);
            let i = rng.random_range(0..k);
            let s = letters.draw_source(inst.k, &mut rng);
            let theta = states.draw(d + n, &mut rng);
            let y_pre = letters.pass(prefix.enc[i], &theta[..d], &mut rng);
            let y_pay = letters.pass(ensemble.codes[i].enc[s], &theta[d..], &mut rng);
            let j = prefix.dec[y_pre];
            let sh = ensemble.codes[j].dec[y_pay];
            let err = t.is_err(s, sh);
            let row = if tr < transcript_limit { Some(ctx.row(tr, i, s, &theta, sh, err)?) } else { None };
            Ok((err, row))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimReport::new(trials, outcomes, states.fixed(), greedy))
}
