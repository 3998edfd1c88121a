//! Symmetrizability: an exact LP decision and a numerical margin.
//!
//! The margin is `η* = inf_Q max(D1(Q), D2(Q))` over joints
//! `Q(x, x', θ, θ', y)`, where
//! `D1 = D(Q_{XX'ΘY} || P_X × Q_{X'Θ} × W(y|x,θ))` and `D2` is the same
//! divergence for `Q_{X'XΘ'Y}` against `P_X × Q_{XΘ'} × W(y|x',θ')`. Both are
//! convex in `Q`; the search runs entropic mirror descent on a soft maximum
//! from several starts and keeps the best true value, an upper bound on `η*`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpError, Relation, Sense};
use crate::model::{ChannelFamily, Dist};
use crate::seeding;

pub const DEFAULT_STARTS: usize = 64;
const DESCENT_ITERS: usize = 3000;

#[derive(Debug, Clone, Serialize)]
pub struct SymmetrizabilityResult {
    pub symmetrizable: bool,
    /// Symmetrizing kernel `U(θ|x)` as rows over `x`, when one exists.
    pub kernel: Option<Vec<Vec<f64>>>,
}

pub fn is_symmetrizable(family: &ChannelFamily) -> Result<SymmetrizabilityResult> {
    let (nx, nt, ny) = (family.x_size, family.t_size, family.y_size);
    let var = |x: usize, t: usize| x * nt + t;
    let mut lp = LinearProgram::new(Sense::Minimize, nx * nt);
    for x in 0..nx {
        lp.add_constraint((0..nt).map(|t| (var(x, t), 1.0)).collect(), Relation::Eq, 1.0);
    }
    for x in 0..nx {
        for xp in (x + 1)..nx {
            for y in 0..ny {
                let mut row = Vec::with_capacity(2 * nt);
                for t in 0..nt {
                    row.push((var(x, t), family.w(t, xp, y)));
                    row.push((var(xp, t), -family.w(t, x, y)));
                }
                lp.add_constraint(row, Relation::Eq, 0.0);
            }
        }
    }
    match lp.solve() {
        Ok(sol) => {
            let kernel = (0..nx)
                .map(|x| (0..nt).map(|t| sol.x[var(x, t)].max(0.0)).collect())
                .collect();
            Ok(SymmetrizabilityResult {
                symmetrizable: true,
                kernel: Some(kernel),
            })
        }
        Err(LpError::Infeasible { .. }) => Ok(SymmetrizabilityResult {
            symmetrizable: false,
            kernel: None,
        }),
        Err(e) => Err(e.into()),
    }
}

/// Flat layout of a joint over `(x, x', θ, θ', y)`.
#[derive(Debug, Clone, Copy)]
pub struct JointLayout {
    pub nx: usize,
    pub nt: usize,
    pub ny: usize,
}

impl JointLayout {
    pub fn of(family: &ChannelFamily) -> Self {
        Self {
            nx: family.x_size,
            nt: family.t_size,
            ny: family.y_size,
        }
    }

    pub fn size(&self) -> usize {
        self.nx * self.nx * self.nt * self.nt * self.ny
    }

    #[inline]
    pub fn idx(&self, x: usize, xp: usize, t: usize, tp: usize, y: usize) -> usize {
        (((x * self.nx + xp) * self.nt + t) * self.nt + tp) * self.ny + y
    }
}

/// The two divergences (bits) and, optionally, their gradients in nats.
fn divergences(
    family: &ChannelFamily,
    p: &[f64],
    q: &[f64],
    mut grads: Option<(&mut [f64], &mut [f64])>,
) -> (f64, f64) {
    let l = JointLayout::of(family);
    let (nx, nt, ny) = (l.nx, l.nt, l.ny);
    let mut q1 = vec![0.0; nx * nx * nt * ny];
    let mut q2 = vec![0.0; nx * nx * nt * ny];
    let mut m1 = vec![0.0; nx * nt];
    let mut m2 = vec![0.0; nx * nt];
    let i3 = |x: usize, xp: usize, t: usize, y: usize| ((x * nx + xp) * nt + t) * ny + y;
    for x in 0..nx {
        for xp in 0..nx {
            for t in 0..nt {
                for tp in 0..nt {
                    for y in 0..ny {
                        let v = q[l.idx(x, xp, t, tp, y)];
                        q1[i3(x, xp, t, y)] += v;
                        q2[i3(x, xp, tp, y)] += v;
                        m1[xp * nt + t] += v;
                        m2[x * nt + tp] += v;
                    }
                }
            }
        }
    }
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    let mut lr1 = vec![0.0; q1.len()];
    let mut lr2 = vec![0.0; q2.len()];
    for x in 0..nx {
        for xp in 0..nx {
            for t in 0..nt {
                for y in 0..ny {
                    let a = q1[i3(x, xp, t, y)];
                    if a > 0.0 {
                        let r = p[x] * m1[xp * nt + t] * family.w(t, x, y);
                        let lr = if r > 0.0 { (a / r).ln() } else { f64::INFINITY };
                        d1 += a * lr;
                        lr1[i3(x, xp, t, y)] = lr;
                    }
                    // θ' plays the role of θ in the swapped divergence
                    let b = q2[i3(x, xp, t, y)];
                    if b > 0.0 {
                        let r = p[xp] * m2[x * nt + t] * family.w(t, xp, y);
                        let lr = if r > 0.0 { (b / r).ln() } else { f64::INFINITY };
                        d2 += b * lr;
                        lr2[i3(x, xp, t, y)] = lr;
                    }
                }
            }
        }
    }
    if let Some((g1, g2)) = grads.as_mut() {
        for x in 0..nx {
            for xp in 0..nx {
                for t in 0..nt {
                    for tp in 0..nt {
                        for y in 0..ny {
                            let k = l.idx(x, xp, t, tp, y);
                            g1[k] = lr1[i3(x, xp, t, y)];
                            g2[k] = lr2[i3(x, xp, tp, y)];
                        }
                    }
                }
            }
        }
    }
    let b = std::f64::consts::LOG2_E;
    ((d1 * b).max(0.0), (d2 * b).max(0.0))
}

/// `(D1, D2)` in bits at a given joint.
pub fn margin_objective(family: &ChannelFamily, p_x: &Dist, q: &[f64]) -> Result<(f64, f64)> {
    let l = JointLayout::of(family);
    if q.len() != l.size() || p_x.len() != family.x_size {
        return Err(Error::Dimension("joint or input law does not match the family".into()));
    }
    Ok(divergences(family, p_x.probs(), q, None))
}

/// The joint built from a symmetrizing kernel, at which both divergences vanish
/// whenever the kernel really symmetrizes the family.
pub fn symmetrizer_joint(family: &ChannelFamily, p: &[f64], kernel: &[Vec<f64>]) -> Vec<f64> {
    let l = JointLayout::of(family);
    let mut q = vec![0.0; l.size()];
    for x in 0..l.nx {
        for xp in 0..l.nx {
            for y in 0..l.ny {
                let v: f64 = (0..l.nt).map(|t| kernel[xp][t] * family.w(t, x, y)).sum();
                if v <= 0.0 {
                    continue;
                }
                for t in 0..l.nt {
                    for tp in 0..l.nt {
                        q[l.idx(x, xp, t, tp, y)] = p[x]
                            * p[xp]
                            * kernel[xp][t]
                            * kernel[x][tp]
                            * family.w(t, x, y)
                            * family.w(tp, xp, y)
                            / v;
                    }
                }
            }
        }
    }
    let s: f64 = q.iter().sum();
    q.iter_mut().for_each(|v| *v /= s);
    q
}

#[derive(Debug, Clone, Serialize)]
pub struct MarginResult {
    /// Best value of `max(D1, D2)` found, in bits.
    pub eta_hat: f64,
    pub d1: f64,
    pub d2: f64,
    pub starts: usize,
}

fn random_start(family: &ChannelFamily, p: &[f64], rng: Option<&mut ChaCha8Rng>) -> Vec<f64> {
    let l = JointLayout::of(family);
    let mut q = vec![0.0; l.size()];
    let mut rng = rng;
    for x in 0..l.nx {
        for xp in 0..l.nx {
            for t in 0..l.nt {
                for tp in 0..l.nt {
                    for y in 0..l.ny {
                        let base = p[x] * p[xp] * family.w(t, x, y) * family.w(tp, xp, y);
                        if base > 0.0 {
                            let r = match rng.as_deref_mut() {
                                Some(g) => g.random_range(0.05..1.0),
                                None => 1.0,
                            };
                            q[l.idx(x, xp, t, tp, y)] = base * r;
                        }
                    }
                }
            }
        }
    }
    let s: f64 = q.iter().sum();
    if s > 0.0 {
        q.iter_mut().for_each(|v| *v /= s);
    }
    q
}

fn descend(family: &ChannelFamily, p: &[f64], mut q: Vec<f64>) -> (f64, f64, f64) {
    let n = q.len();
    let mut g1 = vec![0.0; n];
    let mut g2 = vec![0.0; n];
    let (mut bd1, mut bd2) = divergences(family, p, &q, None);
    let mut best = bd1.max(bd2);
    for it in 0..DESCENT_ITERS {
        let (d1, d2) = divergences(family, p, &q, Some((&mut g1, &mut g2)));
        if d1.max(d2) < best {
            best = d1.max(d2);
            bd1 = d1;
            bd2 = d2;
        }
        if best <= 0.0 {
            break;
        }
        // soft maximum weights, sharpened over time
        let tau = 20.0 * (1.0 + it as f64 / 50.0);
        let m = d1.max(d2);
        let (e1, e2) = (((d1 - m) * tau).exp(), ((d2 - m) * tau).exp());
        let (w1, w2) = (e1 / (e1 + e2), e2 / (e1 + e2));
        let mut gmax: f64 = 0.0;
        let mut g = vec![0.0; n];
        for k in 0..n {
            if q[k] > 0.0 {
                g[k] = w1 * g1[k] + w2 * g2[k];
                gmax = gmax.max(g[k].abs());
            }
        }
        if gmax == 0.0 || !gmax.is_finite() {
            break;
        }
        let step = 0.5 / (gmax * ((it + 1) as f64).sqrt().min(30.0));
        let mut s = 0.0;
        for k in 0..n {
            if q[k] > 0.0 {
                q[k] *= (-step * g[k]).exp();
                s += q[k];
            }
        }
        q.iter_mut().for_each(|v| *v /= s);
    }
    (best, bd1, bd2)
}

pub fn symmetrizability_margin(family: &ChannelFamily, p_x: &Dist, starts: usize, seed: u64) -> Result<MarginResult> {
    if p_x.len() != family.x_size {
        return Err(Error::Dimension("input law does not match the family".into()));
    }
    if p_x.min_prob() <= 0.0 {
        return Err(Error::Parameter("margin requires a strictly positive input law".into()));
    }
    let p = p_x.probs();
    let starts = starts.max(1);
    let mut initial: Vec<Option<Vec<f64>>> = vec![None; starts];
    if let Some(kernel) = is_symmetrizable(family)?.kernel {
        initial[0] = Some(symmetrizer_joint(family, p, &kernel));
    }
    let runs: Vec<(f64, f64, f64)> = initial
        .into_par_iter()
        .enumerate()
        .map(|(i, init)| {
            let q0 = match init {
                Some(q) => q,
                None if i == 0 => random_start(family, p, None),
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seeding::mix(seed, i as u64, 0));
                    random_start(family, p, Some(&mut rng))
                }
            };
            if q0.iter().all(|&v| v == 0.0) {
                return (f64::INFINITY, f64::INFINITY, f64::INFINITY);
            }
            descend(family, p, q0)
        })
        .collect();
    let (eta_hat, d1, d2) = runs
        .into_iter()
        .fold((f64::INFINITY, f64::INFINITY, f64::INFINITY), |a, b| if b.0 < a.0 { b } else { a });
    Ok(MarginResult {
        eta_hat,
        d1,
        d2,
        starts,
    })
}
