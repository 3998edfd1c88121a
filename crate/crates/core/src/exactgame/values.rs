//! Lower value and mixed-strategy value of the finite game.
//!
//! For a fixed jammer law the payoff is linear in the code law, so the inner
//! minimum is attained by a deterministic code and the lower value is the
//! value of the matrix game with codes as rows and state sequences as
//! columns. Small games are solved with the full matrix; larger ones by
//! generating only the codes that are best responses.

use serde::Serialize;

use super::code::{DeterministicCode, GameTables};
use super::payoff::{best_response, payoff_row};
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation, Sense};
use crate::model::{Dist, GameInstance};

/// Largest code count for which the full payoff matrix goes into one LP.
pub const DENSE_CODES: f64 = 1024.0;
const GEN_TOL: f64 = 1e-12;
const MAX_GEN: usize = 10_000;

#[derive(Debug, Clone, Serialize)]
pub struct LowerValue {
    pub value: f64,
    pub q_star: Dist,
    /// First (lexicographic) best response to `q_star`.
    pub best_code_index: u128,
    pub codes_used: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct MixedValue {
    pub value: f64,
    /// Support of the optimal code law as `(flat code index, weight)`.
    pub mixture: Vec<(u128, f64)>,
    /// Jammer law read off the duals.
    pub q: Dist,
}

/// Jammer LP over a list of payoff rows: `max v` s.t. `v <= q . row` for each row.
fn jammer_lp(rows: &[Vec<f64>], nt: usize) -> Result<(f64, Vec<f64>)> {
    let mut lp = LinearProgram::new(Sense::Maximize, nt + 1);
    lp.set_cost(nt, 1.0);
    lp.set_free(nt);
    lp.add_constraint((0..nt).map(|t| (t, 1.0)).collect(), Relation::Eq, 1.0);
    for row in rows {
        let mut c: Vec<(usize, f64)> = row.iter().enumerate().map(|(t, &e)| (t, -e)).collect();
        c.push((nt, 1.0));
        lp.add_constraint(c, Relation::Le, 0.0);
    }
    let sol = lp.solve()?;
    let q: Vec<f64> = sol.x[..nt].iter().map(|v| v.max(0.0)).collect();
    Ok((sol.objective, q))
}

fn initial_codes(t: &GameTables) -> Vec<DeterministicCode> {
    let mut out = vec![best_response(t, &t.averaged(&vec![1.0 / t.nt as f64; t.nt])).1];
    for th in 0..t.nt {
        let c = best_response(t, &t.w[th]).1;
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

pub fn lower_value_exact(inst: &GameInstance) -> Result<LowerValue> {
    let t = GameTables::new(inst)?;
    t.check_code_budget(inst.budget)?;
    let (q, codes_used) = if t.code_count() <= DENSE_CODES {
        let n = t.code_count() as u128;
        let rows: Vec<Vec<f64>> = (0..n).map(|i| payoff_row(&t, &t.code_from_index(i))).collect();
        let (_, q) = jammer_lp(&rows, t.nt)?;
        (q, rows.len())
    } else {
        let mut codes = initial_codes(&t);
        let mut rows: Vec<Vec<f64>> = codes.iter().map(|c| payoff_row(&t, c)).collect();
        let mut rounds = 0;
        loop {
            let (v, q) = jammer_lp(&rows, t.nt)?;
            let (br, code) = best_response(&t, &t.averaged(&q));
            if br >= v - GEN_TOL || codes.contains(&code) {
                break (q, codes.len());
            }
            rounds += 1;
            if rounds > MAX_GEN {
                return Err(Error::NonConvergence {
                    what: "jammer row generation".into(),
                    iterations: rounds,
                    gap: v - br,
                });
            }
            rows.push(payoff_row(&t, &code));
            codes.push(code);
        }
    };
    let q = Dist::from_weights(q)?;
    let (value, code) = best_response(&t, &t.averaged(q.probs()));
    Ok(LowerValue {
        value: value.clamp(0.0, 1.0),
        q_star: q,
        best_code_index: t.code_index(&code),
        codes_used,
    })
}

/// Code-side LP: `min v` s.t. `Σ_c π_c e(c, θ) <= v` for every state sequence,
/// with columns generated by best responses to the dual jammer law.
pub fn mixed_value(inst: &GameInstance) -> Result<MixedValue> {
    let t = GameTables::new(inst)?;
    t.check_code_budget(inst.budget)?;
    let mut codes: Vec<DeterministicCode> = if t.code_count() <= DENSE_CODES {
        (0..t.code_count() as u128).map(|i| t.code_from_index(i)).collect()
    } else {
        initial_codes(&t)
    };
    let mut rows: Vec<Vec<f64>> = codes.iter().map(|c| payoff_row(&t, c)).collect();
    let mut rounds = 0;
    loop {
        let m = codes.len();
        let mut lp = LinearProgram::new(Sense::Minimize, m + 1);
        lp.set_cost(m, 1.0);
        lp.set_free(m);
        lp.add_constraint((0..m).map(|j| (j, 1.0)).collect(), Relation::Eq, 1.0);
        for th in 0..t.nt {
            let mut c: Vec<(usize, f64)> = rows.iter().enumerate().map(|(j, r)| (j, r[th])).collect();
            c.push((m, -1.0));
            lp.add_constraint(c, Relation::Le, 0.0);
        }
        let sol = lp.solve()?;
        let q: Vec<f64> = sol.duals[1..].iter().map(|d| (-d).max(0.0)).collect();
        let qs: f64 = q.iter().sum();
        let q: Vec<f64> = if qs > 0.0 {
            q.iter().map(|v| v / qs).collect()
        } else {
            vec![1.0 / t.nt as f64; t.nt]
        };
        let (br, code) = best_response(&t, &t.averaged(&q));
        if sol.objective - br <= GEN_TOL || codes.contains(&code) {
            let mixture = codes
                .iter()
                .zip(&sol.x[..m])
                .filter(|(_, &w)| w > 1e-14)
                .map(|(c, &w)| (t.code_index(c), w))
                .collect();
            return Ok(MixedValue {
                value: sol.objective.clamp(0.0, 1.0),
                mixture,
                q: Dist::from_weights(q)?,
            });
        }
        rounds += 1;
        if rounds > MAX_GEN {
            return Err(Error::NonConvergence {
                what: "code column generation".into(),
                iterations: rounds,
                gap: sol.objective - br,
            });
        }
        rows.push(payoff_row(&t, &code));
        codes.push(code);
    }
}

/// `min_codes` payoff against the i.i.d. jammer `q_letter^{⊗n}`; the
/// restricted mode in which the jammer is memoryless.
pub fn product_jammer_value(inst: &GameInstance, q_letter: &Dist) -> Result<(f64, u128)> {
    if q_letter.len() != inst.family.t_size {
        return Err(Error::Dimension("per-letter jammer law does not match the family".into()));
    }
    let t = GameTables::new(inst)?;
    t.check_code_budget(inst.budget)?;
    let q = crate::model::seq::iid_weights(q_letter.probs(), inst.n);
    let (v, code) = best_response(&t, &t.averaged(&q));
    Ok((v, t.code_index(&code)))
}
