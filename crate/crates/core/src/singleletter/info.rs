use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation, Sense};
use crate::model::{Channel, ChannelFamily, Dist};

pub fn averaged_channel(family: &ChannelFamily, q: &Dist) -> Result<Channel> {
    family.averaged(q.probs())
}

/// `I(X;Y)` in bits for input law `p` through `ch`.
pub fn mutual_information(p: &[f64], ch: &Channel) -> f64 {
    let out = ch.output(p);
    let mut acc = 0.0;
    for (x, &px) in p.iter().enumerate() {
        if px == 0.0 {
            continue;
        }
        for (y, &w) in ch.row(x).iter().enumerate() {
            if w > 0.0 && out[y] > 0.0 {
                acc += px * w * (w / out[y]).log2();
            }
        }
    }
    acc.max(0.0)
}

/// `log2 W(y|x) / (pW)(y)`. Returns `-inf` when `W(y|x) = 0` and the output
/// has positive mass; an output letter of zero mass is an error.
pub fn info_density(p: &[f64], ch: &Channel, x: usize, y: usize) -> Result<f64> {
    let out = ch.output(p);
    if out[y] <= 0.0 {
        return Err(Error::Undefined(format!("output letter {y} has zero probability")));
    }
    let w = ch.get(x, y);
    if w == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok((w / out[y]).log2())
}

/// Mean, variance and absolute third central moment of a discrete variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub var: f64,
    pub abs3: f64,
}

pub fn moments(values: &[(f64, f64)]) -> Moments {
    // (probability, value) pairs with positive probability
    let mean: f64 = values.iter().map(|(p, v)| p * v).sum();
    let mut var = 0.0;
    let mut abs3 = 0.0;
    for (p, v) in values {
        let d = v - mean;
        var += p * d * d;
        abs3 += p * d.abs().powi(3);
    }
    Moments { mean, var, abs3 }
}

/// Moments of the information density `i(X;Y)` under `p × ch`, where the
/// density is measured against a possibly different reference channel
/// `ref_ch` and reference input `p_ref` (as for a mismatched decoder metric).
pub fn info_density_moments(p: &[f64], ch: &Channel, p_ref: &[f64], ref_ch: &Channel) -> Result<Moments> {
    let out = ref_ch.output(p_ref);
    let mut vals = Vec::new();
    for (x, &px) in p.iter().enumerate() {
        if px == 0.0 {
            continue;
        }
        for (y, &w) in ch.row(x).iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let wr = ref_ch.get(x, y);
            if wr == 0.0 || out[y] == 0.0 {
                return Err(Error::Undefined(format!(
                    "information density is infinite at (x={x}, y={y})"
                )));
            }
            vals.push((px * w, (wr / out[y]).log2()));
        }
    }
    Ok(moments(&vals))
}

/// Variance of `i(X;Y)` under `p × ch` with the matched density.
pub fn info_variance(p: &[f64], ch: &Channel) -> f64 {
    info_density_moments(p, ch, p, ch).map(|m| m.var.max(0.0)).unwrap_or(0.0)
}

/// `D(a || b)` in bits, `+inf` when `a` is not absolutely continuous.
pub fn kl_bits(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        if x > 0.0 {
            if y <= 0.0 {
                return f64::INFINITY;
            }
            acc += x * (x / y).log2();
        }
    }
    acc.max(0.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct DmcCapacity {
    pub lower: f64,
    pub upper: f64,
    pub p: Vec<f64>,
    pub iterations: usize,
}

/// Capacity of a single channel with certified bounds.
///
/// Blahut-Arimoto runs first; `lower = I(p)` and `upper = max_x D(W_x || pW)`.
/// When several inputs tie at the optimum its upper bound converges slowly,
/// so the upper side is then tightened by minimising `max_x D(W_x || r)`
/// over output laws `r` directly; every `r` gives a valid upper bound.
pub fn dmc_capacity(ch: &Channel, tol: f64, max_iter: usize) -> DmcCapacity {
    let mut ba = blahut_arimoto(ch, tol, max_iter);
    if ba.upper - ba.lower > tol {
        let r0 = ch.output(&ba.p);
        if let Ok((u, p)) = minimax_output_law(ch, r0, tol) {
            ba.upper = ba.upper.min(u);
            let i = mutual_information(&p, ch);
            if i > ba.lower {
                ba.lower = i;
                ba.p = p;
            }
        }
    }
    ba
}

fn max_divergence(ch: &Channel, r: &[f64]) -> f64 {
    (0..ch.x_size).map(|x| kl_bits(ch.row(x), r)).fold(f64::NEG_INFINITY, f64::max)
}

/// Trust-region sequential LP for `min_r max_x D(W_x || r)` started at `r0`.
/// Returns the best value and the input law read off the duals of the
/// per-input rows of the last master, which converge to an optimal input.
fn minimax_output_law(ch: &Channel, mut r: Vec<f64>, tol: f64) -> Result<(f64, Vec<f64>)> {
    let ny = ch.y_size;
    let mut best = max_divergence(ch, &r);
    let mut radius = 0.1 * r.iter().copied().fold(f64::INFINITY, f64::min);
    let mut p = vec![1.0 / ch.x_size as f64; ch.x_size];
    for _ in 0..200 {
        let mut lp = LinearProgram::new(Sense::Minimize, ny + 1);
        lp.set_cost(ny, 1.0);
        lp.set_free(ny);
        lp.add_constraint((0..ny).map(|y| (y, 1.0)).collect(), Relation::Eq, 1.0);
        for y in 0..ny {
            lp.add_constraint(vec![(y, 1.0)], Relation::Ge, (r[y] - radius).max(0.0));
            lp.add_constraint(vec![(y, 1.0)], Relation::Le, r[y] + radius);
        }
        // t >= D_x(r) + g_x . (r' - r)
        for x in 0..ch.x_size {
            let row = ch.row(x);
            let d = kl_bits(row, &r);
            let g: Vec<f64> = row.iter().zip(&r).map(|(w, rv)| -std::f64::consts::LOG2_E * w / rv).collect();
            let gr: f64 = g.iter().zip(&r).map(|(a, b)| a * b).sum();
            let mut coeffs: Vec<(usize, f64)> = (0..ny).map(|y| (y, -g[y])).collect();
            coeffs.push((ny, 1.0));
            lp.add_constraint(coeffs, Relation::Ge, d - gr);
        }
        let sol = lp.solve()?;
        let first = 1 + 2 * ny;
        let duals: Vec<f64> = sol.duals[first..].iter().map(|v| v.max(0.0)).collect();
        let z: f64 = duals.iter().sum();
        if z > 0.0 {
            p = duals.iter().map(|v| v / z).collect();
        }
        let cand: Vec<f64> = sol.x[..ny].iter().map(|v| v.max(1e-300)).collect();
        let val = max_divergence(ch, &cand);
        let predicted = best - sol.objective;
        if val < best {
            let actual = best - val;
            best = val;
            r = cand;
            if actual > 0.5 * predicted {
                radius *= 2.0;
            }
        } else {
            radius *= 0.25;
        }
        let floor = r.iter().copied().fold(f64::INFINITY, f64::min);
        radius = radius.min(0.5 * floor);
        if predicted <= 0.1 * tol || radius < 1e-16 {
            break;
        }
    }
    Ok((best, p))
}

/// Plain Blahut-Arimoto iteration from the uniform input.
pub fn blahut_arimoto(ch: &Channel, tol: f64, max_iter: usize) -> DmcCapacity {
    let nx = ch.x_size;
    let mut p = vec![1.0 / nx as f64; nx];
    let mut d = vec![0.0; nx];
    let mut best_upper = f64::INFINITY;
    let mut iterations = 0;
    loop {
        let out = ch.output(&p);
        for (x, dx) in d.iter_mut().enumerate() {
            *dx = kl_bits(ch.row(x), &out);
        }
        let upper = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        best_upper = best_upper.min(upper);
        let lower = mutual_information(&p, ch);
        if best_upper - lower <= tol || iterations >= max_iter {
            return DmcCapacity {
                lower,
                upper: best_upper,
                p,
                iterations,
            };
        }
        // multiplicative update, scaled by the max for stability
        let mut z = 0.0;
        for (px, &dx) in p.iter_mut().zip(&d) {
            *px *= (dx - upper).exp2();
            z += *px;
        }
        for px in &mut p {
            *px /= z;
        }
        iterations += 1;
    }
}
