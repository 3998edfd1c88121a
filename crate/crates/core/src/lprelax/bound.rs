//! The closed-form lower bound carried by the explicit dual point, and its
//! maximum over a grid of jammer laws.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dual::{aux_output_law, partition, tilted_nats, AuxLaw, PartitionKind, UPartition};
use super::relax::Relaxation;
use crate::error::{Error, Result};
use crate::model::{Dist, GameInstance};
use crate::seeding;
use crate::singleletter::dispersion::{grid_resolution, simplex_grid};
use crate::singleletter::RateDistortionResult;

pub const DEFAULT_GAMMA_POINTS: usize = 32;
/// Default number of jammer laws in the grid for the maximin bound.
pub const DEFAULT_Q_GRID: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluation {
    Exact,
    /// Each inner probability is estimated from `trials` samples.
    MonteCarlo { trials: usize, seed: u64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct Theorem4Report {
    /// Best value over the γ grid, clipped to `[0, 1]`.
    pub value: f64,
    pub raw: f64,
    pub gamma: f64,
    /// 95% half-width in Monte Carlo mode.
    pub ci: Option<f64>,
    pub cells: usize,
}

/// `points` log-spaced values in `[1e-3, k + n]`.
pub fn default_gamma_grid(inst: &GameInstance, points: usize) -> Vec<f64> {
    let lo: f64 = 1e-3;
    let hi = (inst.k + inst.n) as f64;
    if points <= 1 {
        return vec![hi];
    }
    (0..points)
        .map(|i| lo * (hi / lo).powf(i as f64 / (points - 1) as f64))
        .collect()
}

/// Probability simplex grid over `T^n` (point masses always included) and the uniform law.
pub fn default_q_grid(inst: &GameInstance, limit: usize) -> Vec<Vec<f64>> {
    let nt = inst.t_space().size();
    let res = grid_resolution(nt, limit.max(nt));
    let mut g = simplex_grid(nt, res);
    let uni = vec![1.0 / nt as f64; nt];
    if !g.iter().any(|p| p.iter().zip(&uni).all(|(a, b)| (a - b).abs() < 1e-15)) {
        g.push(uni);
    }
    g
}

struct Terms<'a> {
    rel: &'a Relaxation,
    j: &'a [f64],
    part: &'a UPartition,
    p_ybar: &'a [Vec<f64>],
}

impl Terms<'_> {
    /// Exact inner bracket for one `(s, x)`:
    /// `P(i ≤ j - γ) + e^{j-γ} P̄(i > j - γ)` with `i = ln(W_q / P̄)`.
    fn exact(&self, s: usize, x: usize, gamma: f64) -> f64 {
        let ny = self.rel.t.ny;
        let scale = (self.j[s] - gamma).exp();
        let row = &self.p_ybar[self.part.cell_of[x]];
        let mut first = 0.0;
        let mut second = 0.0;
        for y in 0..ny {
            let w = self.rel.wq[x * ny + y];
            // i ≤ j - γ  ⇔  W ≤ P̄ e^{j-γ}
            if w <= row[y] * scale {
                first += w;
            } else {
                second += row[y];
            }
        }
        first + scale * second
    }

    fn sampled(&self, s: usize, x: usize, gamma: f64, trials: usize, rng: &mut ChaCha8Rng) -> Result<(f64, f64)> {
        let ny = self.rel.t.ny;
        let scale = (self.j[s] - gamma).exp();
        let row = &self.p_ybar[self.part.cell_of[x]];
        let wrow = &self.rel.wq[x * ny..(x + 1) * ny];
        let dw = WeightedIndex::new(wrow).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
        let db = WeightedIndex::new(row).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
        let mut a = 0usize;
        let mut b = 0usize;
        for _ in 0..trials {
            let y = dw.sample(rng);
            if wrow[y] <= row[y] * scale {
                a += 1;
            }
            let y = db.sample(rng);
            if wrow[y] > row[y] * scale {
                b += 1;
            }
        }
        let m = trials as f64;
        let (pa, pb) = (a as f64 / m, b as f64 / m);
        let var = (pa * (1.0 - pa) + scale * scale * pb * (1.0 - pb)) / m;
        Ok((pa + scale * pb, var))
    }

    /// `Σ_s P_S(s) min_x [...] - U e^{-γ}`, with a variance in Monte Carlo mode.
    fn bound(&self, gamma: f64, eval: Evaluation) -> Result<(f64, f64)> {
        let t = &self.rel.t;
        let mut total = 0.0;
        let mut var = 0.0;
        for s in 0..t.ns {
            let ps = t.p_s[s];
            if ps == 0.0 {
                continue;
            }
            let (best, v) = match eval {
                Evaluation::Exact => ((0..t.nx).map(|x| self.exact(s, x, gamma)).fold(f64::INFINITY, f64::min), 0.0),
                Evaluation::MonteCarlo { trials, seed } => {
                    let mut best = (f64::INFINITY, 0.0);
                    for x in 0..t.nx {
                        let mut rng = ChaCha8Rng::seed_from_u64(seeding::mix(seed, (s * t.nx + x) as u64, 7));
                        let (m, v) = self.sampled(s, x, gamma, trials.max(1), &mut rng)?;
                        if m < best.0 {
                            best = (m, v);
                        }
                    }
                    best
                }
            };
            total += ps * best;
            var += ps * ps * v;
        }
        Ok((total - self.part.len() as f64 * (-gamma).exp(), var))
    }
}

fn check_gamma_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
        return Err(Error::Parameter("gamma grid must be nonempty and positive".into()));
    }
    Ok(())
}

/// The dual-point bound at one jammer law, maximised over `gamma_grid`.
pub fn theorem4_bound(
    inst: &GameInstance,
    q: &[f64],
    rd: &RateDistortionResult,
    part: &UPartition,
    p_ybar: &[Vec<f64>],
    gamma_grid: &[f64],
    eval: Evaluation,
) -> Result<Theorem4Report> {
    check_gamma_grid(gamma_grid)?;
    let rel = Relaxation::new(inst, q)?;
    let j = tilted_nats(inst, rd);
    bound_with(&rel, &j, part, p_ybar, gamma_grid, eval)
}

fn bound_with(
    rel: &Relaxation,
    j: &[f64],
    part: &UPartition,
    p_ybar: &[Vec<f64>],
    gamma_grid: &[f64],
    eval: Evaluation,
) -> Result<Theorem4Report> {
    let terms = Terms { rel, j, part, p_ybar };
    let mut best = (f64::NEG_INFINITY, gamma_grid[0], 0.0);
    for &g in gamma_grid {
        let (v, var) = terms.bound(g, eval)?;
        if v > best.0 {
            best = (v, g, var);
        }
    }
    Ok(Theorem4Report {
        value: best.0.clamp(0.0, 1.0),
        raw: best.0,
        gamma: best.1,
        ci: match eval {
            Evaluation::Exact => None,
            Evaluation::MonteCarlo { .. } => Some(1.96 * best.2.sqrt()),
        },
        cells: part.len(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MaximinBound {
    pub value: f64,
    pub raw: f64,
    pub q: Dist,
    pub gamma: f64,
    pub grid_size: usize,
}

/// Maximum of the exact dual-point bound over a finite grid of jammer laws:
/// a certified lower bound on the lower value.
pub fn maximin_lp_bound(
    inst: &GameInstance,
    rd: &RateDistortionResult,
    q_grid: &[Vec<f64>],
    gamma_grid: &[f64],
    kind: PartitionKind,
    aux: &AuxLaw,
) -> Result<MaximinBound> {
    check_gamma_grid(gamma_grid)?;
    if q_grid.is_empty() {
        return Err(Error::Parameter("jammer grid is empty".into()));
    }
    let part = partition(inst, kind)?;
    let j = tilted_nats(inst, rd);
    let results: Vec<Theorem4Report> = q_grid
        .par_iter()
        .map(|q| {
            let rel = Relaxation::new(inst, q)?;
            let p_ybar = aux_output_law(inst, q, &part, aux)?;
            bound_with(&rel, &j, &part, &p_ybar, gamma_grid, Evaluation::Exact)
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.raw > results[best].raw {
            best = i;
        }
    }
    let r = &results[best];
    Ok(MaximinBound {
        value: r.value,
        raw: r.raw,
        q: Dist::from_weights(q_grid[best].clone())?,
        gamma: r.gamma,
        grid_size: q_grid.len(),
    })
}
