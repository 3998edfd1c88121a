//! An explicit feasible point of DP(q) built from the d-tilted information,
//! a partition `U` of the channel inputs and auxiliary output laws `P̄(y|u)`.
//!
//! Everything here is in nats: `j` is the sequence d-tilted information
//! times `ln 2` and `γ` multiplies through `e^{j - γ}`.

use serde::Serialize;

use super::relax::{DpResidual, DpVariables, Relaxation};
use crate::error::{Error, Result};
use crate::model::{enumerate_types, GameInstance, TypeClass};
use crate::singleletter::{seq_tilted_info, RateDistortionResult};

/// A deterministic partition of `X^n` into cells; `P_{U|X}` is the indicator
/// of the cell.
#[derive(Debug, Clone, Serialize)]
pub struct UPartition {
    pub cell_of: Vec<usize>,
    /// Per-letter input law attached to each cell; the default auxiliary
    /// output law feeds its i.i.d. extension through the averaged channel.
    pub cell_input: Vec<Vec<f64>>,
    pub labels: Vec<String>,
}

impl UPartition {
    pub fn len(&self) -> usize {
        self.cell_input.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cell_input.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionKind {
    /// One cell per input type class.
    Types,
    Single,
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuxLaw {
    /// Output of the i.i.d. cell input law through `W_q`.
    TypeIid,
    /// Uniform over `Y^n` in every cell.
    Uniform,
    /// Explicit `P̄(y|u)`, one row per cell.
    Custom(Vec<Vec<f64>>),
}

pub fn partition(inst: &GameInstance, kind: PartitionKind) -> Result<UPartition> {
    let xs = inst.x_space();
    let a = inst.family.x_size;
    match kind {
        PartitionKind::Single => Ok(UPartition {
            cell_of: vec![0; xs.size()],
            cell_input: vec![vec![1.0 / a as f64; a]],
            labels: vec!["all".into()],
        }),
        PartitionKind::Types => {
            let types = enumerate_types(a, inst.n)?;
            let mut cell_of = Vec::with_capacity(xs.size());
            let mut digits = vec![0; inst.n];
            for x in 0..xs.size() {
                xs.decode(x, &mut digits);
                let tc = TypeClass::of(&digits, a);
                cell_of.push(types.iter().position(|t| *t == tc).expect("every sequence has a type"));
            }
            Ok(UPartition {
                cell_of,
                cell_input: types.iter().map(|t| t.empirical().into_vec()).collect(),
                labels: types.iter().map(|t| format!("{:?}", t.counts)).collect(),
            })
        }
    }
}

/// `P̄(y|u)` laid out `[u][y]`.
pub fn aux_output_law(inst: &GameInstance, q: &[f64], part: &UPartition, law: &AuxLaw) -> Result<Vec<Vec<f64>>> {
    let ny = inst.y_space().size();
    match law {
        AuxLaw::Uniform => Ok(vec![vec![1.0 / ny as f64; ny]; part.len()]),
        AuxLaw::Custom(rows) => {
            if rows.len() != part.len() || rows.iter().any(|r| r.len() != ny) {
                return Err(Error::Dimension(format!(
                    "auxiliary law needs {} rows of length {ny}",
                    part.len()
                )));
            }
            for (u, r) in rows.iter().enumerate() {
                let s: f64 = r.iter().sum();
                if r.iter().any(|v| *v < 0.0 || !v.is_finite()) || (s - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidDistribution(format!("auxiliary output law of cell {u}")));
                }
            }
            Ok(rows.clone())
        }
        AuxLaw::TypeIid => {
            let wq = inst.averaged_seq_channel(q)?;
            let nx = inst.x_space().size();
            Ok(part
                .cell_input
                .iter()
                .map(|p| {
                    let px = crate::model::seq::iid_weights(p, inst.n);
                    let mut out = vec![0.0; ny];
                    for x in 0..nx {
                        if px[x] == 0.0 {
                            continue;
                        }
                        for y in 0..ny {
                            out[y] += px[x] * wq[x * ny + y];
                        }
                    }
                    out
                })
                .collect())
        }
    }
}

/// Sequence d-tilted information in nats, indexed by flat source sequence.
pub fn tilted_nats(inst: &GameInstance, rd: &RateDistortionResult) -> Vec<f64> {
    let sp = inst.s_space();
    (0..sp.size())
        .map(|s| seq_tilted_info(&inst.source, rd, &sp.digits(s)) * std::f64::consts::LN_2)
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct DualPoint {
    pub gamma_param: f64,
    pub vars: DpVariables,
    pub p_ybar_given_u: Vec<Vec<f64>>,
    pub cell_of: Vec<usize>,
    pub dual_cost: f64,
    pub residual: DpResidual,
}

/// Materialises the dual variables
/// `λ_S = -1{d ≤ d} P_S Σ_u P̄(y|u) e^{j-γ}`,
/// `λ_C = P_S Σ_u P(u|x) min{W_q(y|x), P̄(y|u) e^{j-γ}}`,
/// `γ_S = min_x Σ_y λ_C`, `γ_C = -e^{-γ} Σ_u P̄(y|u)`.
pub fn build_theorem4_dual(
    inst: &GameInstance,
    q: &[f64],
    rd: &RateDistortionResult,
    gamma: f64,
    part: &UPartition,
    p_ybar: &[Vec<f64>],
) -> Result<DualPoint> {
    if !(gamma > 0.0) {
        return Err(Error::Parameter("gamma must be positive".into()));
    }
    let rel = Relaxation::new(inst, q)?;
    let j = tilted_nats(inst, rd);
    Ok(build_with(&rel, &j, gamma, part, p_ybar))
}

pub(crate) fn build_with(rel: &Relaxation, j: &[f64], gamma: f64, part: &UPartition, p_ybar: &[Vec<f64>]) -> DualPoint {
    let t = &rel.t;
    let (ns, nx, ny) = (t.ns, t.nx, t.ny);
    let ybar_sum: Vec<f64> = (0..ny).map(|y| p_ybar.iter().map(|r| r[y]).sum()).collect();
    let mut lam_s = vec![0.0; ns * ns * ny];
    let mut lam_c = vec![0.0; nx * ns * ny];
    let mut gam_s = vec![0.0; ns];
    for s in 0..ns {
        let ps = t.p_s[s];
        if ps == 0.0 {
            continue;
        }
        let scale = (j[s] - gamma).exp();
        for sh in 0..ns {
            if t.is_err(s, sh) {
                continue;
            }
            for y in 0..ny {
                lam_s[(s * ns + sh) * ny + y] = -ps * ybar_sum[y] * scale;
            }
        }
        let mut best = f64::INFINITY;
        for x in 0..nx {
            let row = &p_ybar[part.cell_of[x]];
            let mut sum = 0.0;
            for y in 0..ny {
                let v = ps * rel.wq[x * ny + y].min(row[y] * scale);
                lam_c[(x * ns + s) * ny + y] = v;
                sum += v;
            }
            best = best.min(sum);
        }
        gam_s[s] = best;
    }
    let gam_c: Vec<f64> = ybar_sum.iter().map(|v| -(-gamma).exp() * v).collect();
    let vars = DpVariables {
        gam_s,
        gam_c,
        lam_s,
        lam_c,
    };
    DualPoint {
        gamma_param: gamma,
        dual_cost: rel.dual_objective(&vars),
        residual: rel.dual_residual(&vars),
        vars,
        p_ybar_given_u: p_ybar.to_vec(),
        cell_of: part.cell_of.clone(),
    }
}
