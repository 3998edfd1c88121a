//! Random joint source-channel codebooks: a covering source code with a capped
//! first-match encoder, an i.i.d. channel codebook, and a channel decoder that
//! scores each index by its message mass times the `q*`-averaged likelihood.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactgame::{DeterministicCode, GameTables};
use crate::model::seq::iid_weights;
use crate::model::{ball_mass, Dist, GameInstance};
use crate::seeding;

/// Seed role of the stream that draws a single code.
pub(crate) const ROLE_CODE: u64 = 31;

/// Largest codebook accepted by [`required_codebook_size`].
pub const MAX_CODEBOOK: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomCodeSpec {
    /// Codebook size `M`.
    pub m: usize,
    /// Per-letter source codebook law.
    pub p_shat: Dist,
    /// Per-letter channel codebook law.
    pub p_x: Dist,
    /// Sets the encoder cap `L(s) = ⌊γ_L / P_Ŝ(B_d(s))⌋`.
    pub gamma_l: f64,
    /// Per-letter state law of the decoding metric.
    pub q_star: Dist,
    pub seed: u64,
}

impl RandomCodeSpec {
    pub fn validate(&self, inst: &GameInstance) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Parameter("codebook size must be at least 1".into()));
        }
        if !(self.gamma_l.is_finite() && self.gamma_l > 0.0) {
            return Err(Error::Parameter("gamma_l must be positive".into()));
        }
        let fam = &inst.family;
        if self.p_shat.len() != inst.source.size() || self.p_x.len() != fam.x_size || self.q_star.len() != fam.t_size {
            return Err(Error::Dimension("p_shat, p_x and q_star must match the alphabets".into()));
        }
        Ok(())
    }
}

/// A sampled code together with the codebooks it was built from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledCode {
    pub code: DeterministicCode,
    /// Flat indices of `Ŝ_1..Ŝ_M`.
    pub source_book: Vec<usize>,
    /// Flat indices of `X_1..X_M`.
    pub channel_book: Vec<usize>,
    /// Codebook index chosen by the source encoder for each source sequence.
    pub index_of: Vec<usize>,
    /// `P_U(j)`: probability that the source encoder succeeds with index `j`.
    pub weights: Vec<f64>,
}

fn encoder_cap(gamma: f64, mass: f64, m: usize) -> usize {
    let l = gamma / mass;
    // L = 0 would leave no admissible index, so the cap never drops below 1
    if l >= m as f64 {
        m
    } else {
        (l.floor() as usize).max(1)
    }
}

/// `max_s ⌊γ / P_Ŝ(B_d(s))⌋` over source sequences of positive probability:
/// the smallest `M` for which the cap `L(s)` never binds at `M`.
pub fn required_codebook_size(inst: &GameInstance, p_shat: &Dist, gamma: f64) -> Result<usize> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::Parameter("gamma must be positive".into()));
    }
    let ss = inst.s_space();
    let p_s = inst.p_s_seq();
    let mut worst = 1usize;
    for (s, &ps) in p_s.iter().enumerate() {
        if ps == 0.0 {
            continue;
        }
        let b = ball_mass(&ss.digits(s), p_shat, &inst.source, inst.budget)?.mass;
        if b <= 0.0 {
            return Err(Error::DegenerateBall(s));
        }
        let l = (gamma / b).floor();
        if l > MAX_CODEBOOK as f64 {
            return Err(Error::Parameter(format!("required codebook size {l:.3e} exceeds {MAX_CODEBOOK}")));
        }
        worst = worst.max(l as usize);
    }
    Ok(worst)
}

/// Everything about the ensemble that does not depend on the drawn codebooks.
#[derive(Debug, Clone)]
pub struct JsccSampler {
    pub tables: GameTables,
    pub m: usize,
    /// Encoder cap per source sequence, already clipped to `[1, M]`.
    pub cap: Vec<usize>,
    /// `W_{q*}(y|x)` laid out `[x][y]`.
    pub metric: Vec<f64>,
    shat_law: WeightedIndex<f64>,
    x_law: WeightedIndex<f64>,
    k: usize,
    n: usize,
    q_size: usize,
    x_size: usize,
}

impl JsccSampler {
    pub fn new(inst: &GameInstance, spec: &RandomCodeSpec) -> Result<Self> {
        spec.validate(inst)?;
        let tables = GameTables::new(inst)?;
        let ss = inst.s_space();
        let mut cap = vec![1; tables.ns];
        for (s, c) in cap.iter_mut().enumerate() {
            if tables.p_s[s] == 0.0 {
                continue;
            }
            let b = ball_mass(&ss.digits(s), &spec.p_shat, &inst.source, inst.budget)?.mass;
            if b <= 0.0 {
                return Err(Error::DegenerateBall(s));
            }
            *c = encoder_cap(spec.gamma_l, b, spec.m);
        }
        let q_seq = iid_weights(spec.q_star.probs(), inst.n);
        let metric = inst.averaged_seq_channel(&q_seq)?;
        let bad = |e: rand::distr::weighted::Error| Error::InvalidDistribution(e.to_string());
        Ok(Self {
            m: spec.m,
            cap,
            metric,
            shat_law: WeightedIndex::new(spec.p_shat.probs()).map_err(bad)?,
            x_law: WeightedIndex::new(spec.p_x.probs()).map_err(bad)?,
            k: inst.k,
            n: inst.n,
            q_size: inst.source.size(),
            x_size: inst.family.x_size,
            tables,
        })
    }

    fn draw_seq<R: Rng>(law: &WeightedIndex<f64>, radix: usize, len: usize, rng: &mut R) -> usize {
        (0..len).fold(0, |acc, _| acc * radix + law.sample(rng))
    }

    /// Builds the code for given codebooks.
    pub fn build(&self, source_book: Vec<usize>, channel_book: Vec<usize>) -> SampledCode {
        let t = &self.tables;
        let mut enc = vec![0; t.ns];
        let mut index_of = vec![0; t.ns];
        let mut weights = vec![0.0; self.m];
        for s in 0..t.ns {
            let l = self.cap[s];
            let j = (0..l).find(|&j| !t.is_err(s, source_book[j])).unwrap_or(l - 1);
            index_of[s] = j;
            enc[s] = channel_book[j];
            if !t.is_err(s, source_book[j]) {
                weights[j] += t.p_s[s];
            }
        }
        let mut dec = vec![0; t.ny];
        for (y, slot) in dec.iter_mut().enumerate() {
            let mut best = (f64::NEG_INFINITY, 0usize);
            for (j, &x) in channel_book.iter().enumerate() {
                let score = weights[j] * self.metric[x * t.ny + y];
                if score > best.0 {
                    best = (score, j);
                }
            }
            *slot = source_book[best.1];
        }
        SampledCode {
            code: DeterministicCode { enc, dec },
            source_book,
            channel_book,
            index_of,
            weights,
        }
    }

    /// Draws `Ŝ_1..Ŝ_M` and then `X_1..X_M` from `rng`.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> SampledCode {
        let source_book = (0..self.m)
            .map(|_| Self::draw_seq(&self.shat_law, self.q_size, self.k, rng))
            .collect();
        let channel_book = (0..self.m)
            .map(|_| Self::draw_seq(&self.x_law, self.x_size, self.n, rng))
            .collect();
        self.build(source_book, channel_book)
    }
}

/// One code from the ensemble, drawn from the stream fixed by `spec.seed`.
pub fn sample_jscc_code(inst: &GameInstance, spec: &RandomCodeSpec) -> Result<SampledCode> {
    let sampler = JsccSampler::new(inst, spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seeding::mix(spec.seed, 0, ROLE_CODE));
    Ok(sampler.sample(&mut rng))
}
