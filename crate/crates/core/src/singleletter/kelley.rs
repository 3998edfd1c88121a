//! Kelley cutting planes for a convex function on the probability simplex.
//!
//! The master problem is solved in its dual form, which has one column per
//! cut and only `dim + 1` rows, so late iterations stay cheap. The primal
//! point is read off the row duals and the cut weights are the columns.

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation, Sense};

/// Affine minorant `value + grad . (w - z) <= f(w)` taken at the query point `z`.
pub struct Cut {
    pub value: f64,
    pub grad: Vec<f64>,
}

/// What an oracle reports at a query point.
pub struct Probe {
    /// Upper estimate of `f(z)`.
    pub upper: f64,
    pub cuts: Vec<Cut>,
}

impl Probe {
    pub fn single(upper: f64, value: f64, grad: Vec<f64>) -> Self {
        Self {
            upper,
            cuts: vec![Cut { value, grad }],
        }
    }
}

#[derive(Debug, Clone)]
pub struct KelleyOutcome {
    pub lower: f64,
    pub upper: f64,
    /// Point with the smallest upper estimate.
    pub best: Vec<f64>,
    /// Master weights, indexed by probe and then by cut within the probe.
    /// They sum to one over all cuts.
    pub weights: Vec<Vec<f64>>,
    pub iterations: usize,
    pub converged: bool,
}

impl KelleyOutcome {
    pub fn require(self, what: &str) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                what: what.into(),
                iterations: self.iterations,
                gap: self.upper - self.lower,
            })
        }
    }
}

/// Every vertex and the centre.
pub fn vertex_seeds(dim: usize) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            let mut v = vec![0.0; dim];
            v[i] = 1.0;
            v
        })
        .collect();
    if dim > 1 {
        pts.push(vec![1.0 / dim as f64; dim]);
    }
    pts
}

/// Mixes `z` with a small multiple of the uniform law so every oracle sees a
/// strictly positive point.
pub fn interiorise(z: &[f64], eps: f64) -> Vec<f64> {
    let u = 1.0 / z.len() as f64;
    let s: f64 = z.iter().map(|v| v.max(0.0)).sum();
    z.iter().map(|v| (1.0 - eps) * v.max(0.0) / s + eps * u).collect()
}

#[derive(Debug, Clone, Copy)]
pub struct KelleyOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Weight of the uniform law mixed into every query point.
    pub interior: f64,
}

pub fn minimize<F>(dim: usize, seeds: Vec<Vec<f64>>, mut oracle: F, opts: KelleyOptions) -> Result<KelleyOutcome>
where
    F: FnMut(&[f64]) -> Result<Probe>,
{
    // (b, g, probe, slot) with t >= b + g.w
    let mut cuts: Vec<(f64, Vec<f64>, usize, usize)> = Vec::new();
    let mut shape: Vec<usize> = Vec::new();
    let mut best_upper = f64::INFINITY;
    let mut best = vec![1.0 / dim as f64; dim];
    let mut probe_at = |z: &[f64], cuts: &mut Vec<(f64, Vec<f64>, usize, usize)>, shape: &mut Vec<usize>| -> Result<(f64, Vec<f64>)> {
        let z = interiorise(z, opts.interior);
        let p = oracle(&z)?;
        let id = shape.len();
        shape.push(p.cuts.len());
        for (slot, c) in p.cuts.into_iter().enumerate() {
            let b = c.value - c.grad.iter().zip(&z).map(|(g, v)| g * v).sum::<f64>();
            cuts.push((b, c.grad, id, slot));
        }
        Ok((p.upper, z))
    };
    for z in seeds {
        let (u, z) = probe_at(&z, &mut cuts, &mut shape)?;
        if u < best_upper {
            best_upper = u;
            best = z;
        }
    }
    let mut lower = f64::NEG_INFINITY;
    let mut iterations = 0;
    loop {
        let (lo, z, w) = solve_master(dim, &cuts)?;
        lower = lower.max(lo);
        let converged = best_upper - lower <= opts.tol;
        if converged || iterations >= opts.max_iter {
            let mut weights: Vec<Vec<f64>> = shape.iter().map(|&n| vec![0.0; n]).collect();
            for (c, wj) in cuts.iter().zip(&w) {
                weights[c.2][c.3] = wj.max(0.0);
            }
            return Ok(KelleyOutcome {
                lower,
                upper: best_upper,
                best,
                weights,
                iterations,
                converged,
            });
        }
        let (u, z) = probe_at(&z, &mut cuts, &mut shape)?;
        if u < best_upper {
            best_upper = u;
            best = z;
        }
        iterations += 1;
    }
}

/// Dual master: max Σ μ_j b_j + v  s.t.  Σ μ_j = 1,  v - Σ μ_j g_jθ <= 0.
fn solve_master(dim: usize, cuts: &[(f64, Vec<f64>, usize, usize)]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let m = cuts.len();
    let mut lp = LinearProgram::new(Sense::Maximize, m + 1);
    for (j, c) in cuts.iter().enumerate() {
        lp.set_cost(j, c.0);
    }
    lp.set_cost(m, 1.0);
    lp.set_free(m);
    lp.add_constraint((0..m).map(|j| (j, 1.0)).collect(), Relation::Eq, 1.0);
    for th in 0..dim {
        let mut row: Vec<(usize, f64)> = cuts.iter().enumerate().map(|(j, c)| (j, -c.1[th])).collect();
        row.push((m, 1.0));
        lp.add_constraint(row, Relation::Le, 0.0);
    }
    let sol = lp.solve()?;
    let z: Vec<f64> = sol.duals[1..].iter().map(|v| v.max(0.0)).collect();
    let s: f64 = z.iter().sum();
    let z = if s > 0.0 {
        z.iter().map(|v| v / s).collect()
    } else {
        vec![1.0 / dim as f64; dim]
    };
    Ok((sol.objective, z, sol.x[..m].to_vec()))
}
