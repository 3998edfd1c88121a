//! The bilinear program SC(q), its lift-and-project relaxation LP(q) and the
//! dual DP(q), written out explicitly for tiny instances.
//!
//! LP(q) variables are `Q(x|s)`, `Q(ŝ|y)` and `V(s,x,y,ŝ)`, standing in for
//! the product `Q(x|s) Q(ŝ|y)`. Its rows, in order, carry the dual
//! variables `γ_S(s)`, `γ_C(y)`, `λ_S(s,ŝ,y)` and `λ_C(x,s,y)`.

use serde::Serialize;

use crate::error::Result;
use crate::exactgame::code::GameTables;
use crate::exactgame::payoff::best_response;
use crate::lp::{LinearProgram, Relation, Sense};
use crate::model::seq::check_budget;
use crate::model::GameInstance;

/// Largest dense tableau (rows times columns) built for LP(q).
pub const LP_TABLEAU_LIMIT: f64 = 4e6;

/// Optimal value of SC(q) and the first deterministic code attaining it.
#[derive(Debug, Clone, Serialize)]
pub struct ScSolution {
    pub value: f64,
    pub code_index: u128,
}

/// Dual variables of DP(q). Layouts: `gam_s[s]`, `gam_c[y]`,
/// `lam_s[(s * ns + ŝ) * ny + y]`, `lam_c[(x * ns + s) * ny + y]`.
#[derive(Debug, Clone, Serialize)]
pub struct DpVariables {
    pub gam_s: Vec<f64>,
    pub gam_c: Vec<f64>,
    pub lam_s: Vec<f64>,
    pub lam_c: Vec<f64>,
}

/// Largest violation of each DP(q) constraint family.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DpResidual {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl DpResidual {
    pub fn max(&self) -> f64 {
        self.r1.max(self.r2).max(self.r3)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LpSolutionReport {
    /// OPT(LP(q)).
    pub value: f64,
    /// DP(q) objective at the solver duals.
    pub dual_value: f64,
    pub dual: DpVariables,
    pub dual_residual: DpResidual,
    pub iterations: usize,
}

/// The pieces of LP(q) and DP(q) that depend on the instance and on `q`.
pub struct Relaxation {
    pub t: GameTables,
    /// `W_q(y|x)` laid out `[x][y]`.
    pub wq: Vec<f64>,
}

impl Relaxation {
    pub fn new(inst: &GameInstance, q: &[f64]) -> Result<Self> {
        let t = GameTables::new(inst)?;
        let wq = inst.averaged_seq_channel(q)?;
        Ok(Self { t, wq })
    }

    /// `Π(s,x,y,ŝ) = 1{d(s,ŝ) > d} P_S(s) W_q(y|x)`.
    #[inline]
    pub fn pi(&self, s: usize, x: usize, y: usize, sh: usize) -> f64 {
        if self.t.is_err(s, sh) {
            self.t.p_s[s] * self.wq[x * self.t.ny + y]
        } else {
            0.0
        }
    }

    pub fn dual_objective(&self, d: &DpVariables) -> f64 {
        d.gam_s.iter().sum::<f64>() + d.gam_c.iter().sum::<f64>()
    }

    /// Violation of constraints (I), (II) and (III); zero means feasible.
    pub fn dual_residual(&self, d: &DpVariables) -> DpResidual {
        let (ns, nx, ny) = (self.t.ns, self.t.nx, self.t.ny);
        let mut r1: f64 = 0.0;
        for s in 0..ns {
            for x in 0..nx {
                let sum: f64 = (0..ny).map(|y| d.lam_c[(x * ns + s) * ny + y]).sum();
                r1 = r1.max(d.gam_s[s] - sum);
            }
        }
        let mut r2: f64 = 0.0;
        for y in 0..ny {
            for sh in 0..ns {
                let sum: f64 = (0..ns).map(|s| d.lam_s[(s * ns + sh) * ny + y]).sum();
                r2 = r2.max(d.gam_c[y] - sum);
            }
        }
        let mut r3: f64 = 0.0;
        for s in 0..ns {
            for x in 0..nx {
                for y in 0..ny {
                    let lc = d.lam_c[(x * ns + s) * ny + y];
                    for sh in 0..ns {
                        r3 = r3.max(d.lam_s[(s * ns + sh) * ny + y] + lc - self.pi(s, x, y, sh));
                    }
                }
            }
        }
        DpResidual { r1, r2, r3 }
    }
}

/// OPT(SC(q)): for fixed `q` the bilinear minimum sits at a deterministic code.
pub fn solve_sc(inst: &GameInstance, q: &[f64]) -> Result<ScSolution> {
    let t = GameTables::new(inst)?;
    t.check_code_budget(inst.budget)?;
    let wq = inst.averaged_seq_channel(q)?;
    let (value, code) = best_response(&t, &wq);
    Ok(ScSolution {
        value,
        code_index: t.code_index(&code),
    })
}

pub fn solve_lp(inst: &GameInstance, q: &[f64]) -> Result<LpSolutionReport> {
    let rel = Relaxation::new(inst, q)?;
    let (ns, nx, ny) = (rel.t.ns, rel.t.nx, rel.t.ny);
    let n_qx = ns * nx;
    let n_qd = ny * ns;
    let n_v = ns * nx * ny * ns;
    let n_vars = n_qx + n_qd + n_v;
    let n_rows = ns + ny + ns * ns * ny + nx * ns * ny;
    check_budget("LP(q) tableau", (n_vars + n_rows) as f64 * n_rows as f64, LP_TABLEAU_LIMIT.min(inst.budget))?;

    let qx = |s: usize, x: usize| s * nx + x;
    let qd = |y: usize, sh: usize| n_qx + y * ns + sh;
    let v = |s: usize, x: usize, y: usize, sh: usize| n_qx + n_qd + ((s * nx + x) * ny + y) * ns + sh;

    let mut lp = LinearProgram::new(Sense::Minimize, n_vars);
    for s in 0..ns {
        for x in 0..nx {
            for y in 0..ny {
                for sh in 0..ns {
                    let c = rel.pi(s, x, y, sh);
                    if c != 0.0 {
                        lp.set_cost(v(s, x, y, sh), c);
                    }
                }
            }
        }
    }
    for s in 0..ns {
        lp.add_constraint((0..nx).map(|x| (qx(s, x), 1.0)).collect(), Relation::Eq, 1.0);
    }
    for y in 0..ny {
        lp.add_constraint((0..ns).map(|sh| (qd(y, sh), 1.0)).collect(), Relation::Eq, 1.0);
    }
    for s in 0..ns {
        for sh in 0..ns {
            for y in 0..ny {
                let mut row: Vec<(usize, f64)> = (0..nx).map(|x| (v(s, x, y, sh), 1.0)).collect();
                row.push((qd(y, sh), -1.0));
                lp.add_constraint(row, Relation::Eq, 0.0);
            }
        }
    }
    for x in 0..nx {
        for s in 0..ns {
            for y in 0..ny {
                let mut row: Vec<(usize, f64)> = (0..ns).map(|sh| (v(s, x, y, sh), 1.0)).collect();
                row.push((qx(s, x), -1.0));
                lp.add_constraint(row, Relation::Eq, 0.0);
            }
        }
    }
    let sol = lp.solve()?;
    let d = &sol.duals;
    let o2 = ns;
    let o3 = o2 + ny;
    let o4 = o3 + ns * ns * ny;
    let dual = DpVariables {
        gam_s: d[..o2].to_vec(),
        gam_c: d[o2..o3].to_vec(),
        lam_s: d[o3..o4].to_vec(),
        lam_c: d[o4..].to_vec(),
    };
    Ok(LpSolutionReport {
        value: sol.objective,
        dual_value: rel.dual_objective(&dual),
        dual_residual: rel.dual_residual(&dual),
        dual,
        iterations: sol.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ChannelFamily, Dist, SourceSpec};

    #[test]
    fn bsc_jam_chain() {
        let inst = GameInstance::new(1, 1, ChannelFamily::bsc_family(&[0.1, 0.2]), SourceSpec::hamming(Dist::uniform(2), 0.0)).unwrap();
        let q = [0.0, 1.0];
        let sc = solve_sc(&inst, &q).unwrap();
        assert!((sc.value - 0.2).abs() < 1e-12);
        let lp = solve_lp(&inst, &q).unwrap();
        assert!(lp.value <= sc.value + 1e-9);
        assert!((lp.value - lp.dual_value).abs() < 1e-9);
        assert!(lp.dual_residual.max() < 1e-9);
    }
}
