//! Bounds for the deterministic index code that carries the choice of
//! random code: the average-error achievability bound built on the typical
//! set `A` and the decision function `Z`, and its asymptotic form.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::params::BoundParams;
use super::report::BoundReport;
use crate::error::{Error, Result};
use crate::lprelax::Evaluation;
use crate::model::seq::{check_budget, iid_weights};
use crate::model::{enumerate_types, ChannelFamily, Dist, SeqSpace};
use crate::seeding;

/// `K = c0 n` and `d_n = ceil(log2 K / (C - δ))`.
pub fn index_code_lengths(n: usize, capacity: f64, params: &BoundParams) -> Result<(f64, usize)> {
    let k = params.c0 * n as f64;
    let gap = capacity - params.delta_for(capacity);
    if !(gap > 0.0) {
        return Err(Error::Parameter(format!("C - delta = {gap} must be positive")));
    }
    let d = (k.log2() / gap).ceil();
    if !(d.is_finite() && d >= 1.0) {
        return Err(Error::Parameter("index blocklength is not a positive integer".into()));
    }
    Ok((k, d as usize))
}

/// Inputs of the index-code bound at blocklength `n`.
#[derive(Debug, Clone, Serialize)]
pub struct Theorem5Inputs {
    pub n: usize,
    /// Per-letter codebook law; the codebook law is its i.i.d. extension.
    pub p_x: Dist,
    /// Threshold on the information density defining `A`, in bits.
    pub typ_gamma: f64,
    /// Number of messages `M`.
    pub m_codes: f64,
    /// Divergence margin of `Z`, in bits.
    pub eta: f64,
    pub eval: Evaluation,
    pub budget: f64,
}

struct Tables {
    nx: usize,
    ny: usize,
    nt: usize,
    xs: SeqSpace,
    ys: SeqSpace,
    ts: SeqSpace,
    px: Vec<f64>,
    /// `A` as `[x][y]`.
    a: Vec<bool>,
}

fn seq_prob(family: &ChannelFamily, theta: &[usize], x: &[usize], y: &[usize]) -> f64 {
    theta.iter().zip(x).zip(y).map(|((&t, &a), &b)| family.w(t, a, b)).product()
}

impl Tables {
    fn new(family: &ChannelFamily, inp: &Theorem5Inputs) -> Result<Self> {
        let n = inp.n;
        let (nx, ny, nt) = (family.x_size, family.y_size, family.t_size);
        let xs = SeqSpace::new(nx, n);
        let ys = SeqSpace::new(ny, n);
        let ts = SeqSpace::new(nt, n);
        let px = iid_weights(inp.p_x.probs(), n);
        let laws: Vec<Vec<f64>> = enumerate_types(nt, n)?.iter().map(|t| t.empirical().into_vec()).collect();
        let chans = laws.iter().map(|q| family.averaged(q)).collect::<Result<Vec<_>>>()?;
        let (sx, sy) = (xs.size(), ys.size());
        let mut a = vec![false; sx * sy];
        let (mut xd, mut yd) = (vec![0; n], vec![0; n]);
        for ch in &chans {
            let out = iid_out(&px, ch, &xs, &ys);
            for x in 0..sx {
                xs.decode(x, &mut xd);
                for y in 0..sy {
                    ys.decode(y, &mut yd);
                    let w: f64 = xd.iter().zip(&yd).map(|(&i, &j)| ch.get(i, j)).product();
                    if w > 0.0 && (out[y] == 0.0 || (w / out[y]).log2() > inp.typ_gamma) {
                        a[x * sy + y] = true;
                    }
                }
            }
        }
        Ok(Self { nx, ny, nt, xs, ys, ts, px, a })
    }

    fn in_a(&self, x: usize, y: usize) -> bool {
        self.a[x * self.ys.size() + y]
    }

    /// `Z(x, x̄, y)`.
    fn z(&self, family: &ChannelFamily, p_x: &[f64], eta: f64, x: usize, xb: usize, y: usize) -> bool {
        if !self.in_a(x, y) {
            return false;
        }
        if !self.in_a(xb, y) {
            return true;
        }
        let n = self.xs.len;
        let (xd, xbd, yd) = (self.xs.digits(x), self.xs.digits(xb), self.ys.digits(y));
        let mut th = vec![0; n];
        for t in 0..self.ts.size() {
            self.ts.decode(t, &mut th);
            if joint_type_divergence(family, p_x, &xd, &xbd, &th, &yd, self.nx, self.nt, self.ny) <= eta {
                return true;
            }
        }
        false
    }
}

fn iid_out(px: &[f64], ch: &crate::model::Channel, xs: &SeqSpace, ys: &SeqSpace) -> Vec<f64> {
    let n = xs.len;
    let mut out = vec![0.0; ys.size()];
    let (mut xd, mut yd) = (vec![0; n], vec![0; n]);
    for (x, &p) in px.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        xs.decode(x, &mut xd);
        for (y, o) in out.iter_mut().enumerate() {
            ys.decode(y, &mut yd);
            *o += p * xd.iter().zip(&yd).map(|(&i, &j)| ch.get(i, j)).product::<f64>();
        }
    }
    out
}

/// `D(T_{x x̄ θ y} || P_X × T_{x̄ θ} × W)` in bits.
#[allow(clippy::too_many_arguments)]
pub fn joint_type_divergence(
    family: &ChannelFamily,
    p_x: &[f64],
    x: &[usize],
    xb: &[usize],
    th: &[usize],
    y: &[usize],
    nx: usize,
    nt: usize,
    ny: usize,
) -> f64 {
    let n = x.len() as f64;
    let idx = |a: usize, b: usize, t: usize, o: usize| ((a * nx + b) * nt + t) * ny + o;
    let mut joint = vec![0.0; nx * nx * nt * ny];
    let mut marg = vec![0.0; nx * nt];
    for i in 0..x.len() {
        joint[idx(x[i], xb[i], th[i], y[i])] += 1.0 / n;
        marg[xb[i] * nt + th[i]] += 1.0 / n;
    }
    let mut d = 0.0;
    for a in 0..nx {
        for b in 0..nx {
            for t in 0..nt {
                for o in 0..ny {
                    let q = joint[idx(a, b, t, o)];
                    if q == 0.0 {
                        continue;
                    }
                    let r = p_x[a] * marg[b * nt + t] * family.w(t, a, o);
                    if r == 0.0 {
                        return f64::INFINITY;
                    }
                    d += q * (q / r).log2();
                }
            }
        }
    }
    d.max(0.0)
}

/// Representative sequence (letters sorted) of every type over `T^n`.
pub(crate) fn type_representatives(nt: usize, n: usize) -> Result<Vec<Vec<usize>>> {
    Ok(enumerate_types(nt, n)?
        .into_iter()
        .map(|t| t.counts.iter().enumerate().flat_map(|(l, &c)| std::iter::repeat_n(l, c)).collect())
        .collect())
}

/// The index-code achievability bound
/// `√(2 ln(3|T|^n)/M) + max_θ [P(A^c) + 2 log(3|T|^n) max_x̄ P(Z(X,x̄,Y)=0, A) + 2M log e P(Z(X,X̄,Y)=0, A)]`
/// for the i.i.d. codebook law. Only the type of θ matters, so the maximum
/// runs over one representative per type.
pub fn theorem5_bound(family: &ChannelFamily, inp: &Theorem5Inputs) -> Result<BoundReport> {
    if inp.n == 0 || !(inp.m_codes >= 1.0) || !inp.typ_gamma.is_finite() || !(inp.eta >= 0.0) {
        return Err(Error::Parameter("theorem 5 needs n >= 1, M >= 1, finite threshold and eta >= 0".into()));
    }
    if inp.p_x.len() != family.x_size {
        return Err(Error::Dimension("p_x must be a law on the input alphabet".into()));
    }
    let n = inp.n;
    let sx = SeqSpace::new(family.x_size, n).size_f64();
    let sy = SeqSpace::new(family.y_size, n).size_f64();
    let st = SeqSpace::new(family.t_size, n).size_f64();
    let log2_size = (3.0f64).log2() + n as f64 * (family.t_size as f64).log2();
    let ln_size = log2_size * std::f64::consts::LN_2;
    let first = (2.0 * ln_size / inp.m_codes).sqrt();
    let c2 = 2.0 * log2_size;
    let c3 = 2.0 * inp.m_codes * std::f64::consts::LOG2_E;
    let reps = type_representatives(family.t_size, n)?;

    let (probs, ci) = match inp.eval {
        Evaluation::Exact => {
            check_budget("theorem 5 exact sum", sx * sx * sy * (1.0 + st * n as f64), inp.budget)?;
            let tb = Tables::new(family, inp)?;
            let z = z_table(family, inp, &tb);
            let mut best: Option<[f64; 4]> = None;
            for th in &reps {
                let [p1, p2, p3] = exact_probs(family, &tb, &z, th);
                let v = p1 + c2 * p2 + c3 * p3;
                if best.is_none_or(|b| v > b[0]) {
                    best = Some([v, p1, p2, p3]);
                }
            }
            (best.expect("at least one type"), None)
        }
        Evaluation::MonteCarlo { trials, seed } => {
            let draws = 2.0 * trials.max(2) as f64 * reps.len() as f64;
            check_budget("theorem 5 sampled Z checks", draws * (sx + 1.0) * st * n as f64 + sx * sy, inp.budget)?;
            let tb = Tables::new(family, inp)?;
            let mut best: Option<([f64; 4], f64)> = None;
            for (ti, th) in reps.iter().enumerate() {
                let (p, half) = sampled_probs(family, inp, &tb, th, trials.max(2), seeding::mix(seed, ti as u64, 11), c2, c3)?;
                let v = p[0] + c2 * p[1] + c3 * p[2];
                if best.is_none_or(|(b, _)| v > b[0]) {
                    best = Some(([v, p[0], p[1], p[2]], half));
                }
            }
            let (b, h) = best.expect("at least one type");
            (b, Some(h))
        }
    };
    let mut r = BoundReport::sum(
        "t5",
        &[
            ("index_sqrt", first),
            ("not_typical", probs[1]),
            ("z_fixed", c2 * probs[2]),
            ("z_random", c3 * probs[3]),
        ],
    )
    .detail("n", n as f64)
    .detail("m_codes", inp.m_codes)
    .detail("typ_gamma", inp.typ_gamma)
    .detail("eta", inp.eta);
    r.mc_ci = ci;
    Ok(r)
}

/// `1{Z(x, x̄, y) = 0, (x, y) ∈ A}` laid out `[x][x̄][y]`.
fn z_table(family: &ChannelFamily, inp: &Theorem5Inputs, tb: &Tables) -> Vec<bool> {
    let (sx, sy) = (tb.xs.size(), tb.ys.size());
    let mut out = vec![false; sx * sx * sy];
    for x in 0..sx {
        for y in 0..sy {
            if !tb.in_a(x, y) {
                continue;
            }
            for xb in 0..sx {
                out[(x * sx + xb) * sy + y] = !tb.z(family, inp.p_x.probs(), inp.eta, x, xb, y);
            }
        }
    }
    out
}

fn exact_probs(family: &ChannelFamily, tb: &Tables, zbad: &[bool], th: &[usize]) -> [f64; 3] {
    let (sx, sy) = (tb.xs.size(), tb.ys.size());
    let n = th.len();
    let (mut xd, mut yd) = (vec![0; n], vec![0; n]);
    let mut p1 = 0.0;
    let mut per_xb = vec![0.0; sx];
    for x in 0..sx {
        let px = tb.px[x];
        if px == 0.0 {
            continue;
        }
        tb.xs.decode(x, &mut xd);
        for y in 0..sy {
            tb.ys.decode(y, &mut yd);
            let w = px * seq_prob(family, th, &xd, &yd);
            if w == 0.0 {
                continue;
            }
            if !tb.in_a(x, y) {
                p1 += w;
                continue;
            }
            for (xb, acc) in per_xb.iter_mut().enumerate() {
                if zbad[(x * sx + xb) * sy + y] {
                    *acc += w;
                }
            }
        }
    }
    let p2 = per_xb.iter().copied().fold(0.0, f64::max);
    let p3 = per_xb.iter().zip(&tb.px).map(|(a, b)| a * b).sum();
    [p1, p2, p3]
}

#[allow(clippy::too_many_arguments)]
fn sampled_probs(
    family: &ChannelFamily,
    inp: &Theorem5Inputs,
    tb: &Tables,
    th: &[usize],
    trials: usize,
    seed: u64,
    c2: f64,
    c3: f64,
) -> Result<([f64; 3], f64)> {
    let sx = tb.xs.size();
    let n = th.len();
    let letter = WeightedIndex::new(inp.p_x.probs()).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    let rows: Vec<Vec<WeightedIndex<f64>>> = (0..tb.nt)
        .map(|t| {
            (0..tb.nx)
                .map(|a| WeightedIndex::new(family.row(t, a)).expect("channel rows are distributions"))
                .collect()
        })
        .collect();
    // one draw: (x, y, x̄); the same stream is replayed for the variance pass
    let draw = |rng: &mut ChaCha8Rng| {
        let xd: Vec<usize> = (0..n).map(|_| letter.sample(rng)).collect();
        let yd: Vec<usize> = (0..n).map(|i| rows[th[i]][xd[i]].sample(rng)).collect();
        let xbd: Vec<usize> = (0..n).map(|_| letter.sample(rng)).collect();
        (tb.xs.encode(&xd), tb.ys.encode(&yd), tb.xs.encode(&xbd))
    };
    let bad = |x: usize, xb: usize, y: usize| !tb.z(family, inp.p_x.probs(), inp.eta, x, xb, y);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c1 = 0usize;
    let mut c3n = 0usize;
    let mut per_xb = vec![0usize; sx];
    for _ in 0..trials {
        let (x, y, xb) = draw(&mut rng);
        if !tb.in_a(x, y) {
            c1 += 1;
            continue;
        }
        for (b, acc) in per_xb.iter_mut().enumerate() {
            if bad(x, b, y) {
                *acc += 1;
            }
        }
        if bad(x, xb, y) {
            c3n += 1;
        }
    }
    let star = (0..sx).max_by_key(|&b| (per_xb[b], std::cmp::Reverse(b))).unwrap_or(0);
    let m = trials as f64;
    // second pass: variance of the combined per-sample value at the chosen x̄
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..trials {
        let (x, y, xb) = draw(&mut rng);
        let v = if !tb.in_a(x, y) {
            1.0
        } else {
            c2 * f64::from(u8::from(bad(x, star, y))) + c3 * f64::from(u8::from(bad(x, xb, y)))
        };
        s1 += v;
        s2 += v * v;
    }
    let mean = s1 / m;
    let var = (s2 / m - mean * mean).max(0.0) / m;
    Ok(([c1 as f64 / m, per_xb[star] as f64 / m, c3n as f64 / m], 1.96 * var.sqrt()))
}

/// Alphabet sizes `|X|, |T|, |Y|` entering the exponent of the `Z` term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct AlphabetSizes {
    pub x: usize,
    pub t: usize,
    pub y: usize,
}

impl AlphabetSizes {
    pub fn of(family: &ChannelFamily) -> Self {
        Self {
            x: family.x_size,
            t: family.t_size,
            y: family.y_size,
        }
    }
}

/// Asymptotic form of the index-code bound at blocklength `d_n` with `K`
/// messages. The last term is evaluated in the log domain; its base-2
/// logarithm is kept in `details`.
pub fn theorem9_bound(
    params: &BoundParams,
    capacity: f64,
    d_n: usize,
    k_codes: f64,
    v0: f64,
    sizes: AlphabetSizes,
) -> Result<BoundReport> {
    if d_n < 2 || !(k_codes >= 1.0) || !(v0 >= 0.0) {
        return Err(Error::Parameter("theorem 9 needs d_n >= 2, K >= 1 and V0 >= 0".into()));
    }
    let delta = params.delta_for(capacity);
    let dn = d_n as f64;
    let margin = delta - dn.sqrt().log2() / dn;
    if !(margin > 0.0) {
        return Err(Error::Parameter(format!(
            "delta - log(sqrt(d_n))/d_n = {margin} must be positive"
        )));
    }
    let log2_size = (3.0f64).log2() + dn * (sizes.t as f64).log2();
    let index = (2.0 * log2_size * std::f64::consts::LN_2 / k_codes).sqrt();
    let cheb = v0 / (dn * margin * margin);
    let clt = 2.0 * std::f64::consts::LOG2_E / dn.sqrt();
    let expo = (sizes.x * sizes.x * sizes.t * sizes.y) as f64;
    let log2_z = 1.0 + log2_size.log2() + expo * (dn + 1.0).log2() - dn * params.eta;
    let zterm = log2_z.exp2();
    Ok(BoundReport::sum(
        "t9",
        &[("index_sqrt", index), ("chebyshev", cheb), ("clt", clt), ("z_types", zterm)],
    )
    .detail("d_n", dn)
    .detail("k_codes", k_codes)
    .detail("delta", delta)
    .detail("log2_z_types", log2_z)
    .with_params(params))
}
