use serde::{Deserialize, Serialize};

use super::channel::ChannelFamily;
use super::seq::{check_budget, iid_weights, SeqSpace, DEFAULT_BUDGET, DISTORTION_EPS};
use super::source::SourceSpec;
use crate::error::{Error, Result};

/// One finite-blocklength game: `k` source letters over `n` channel uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameInstance {
    pub k: usize,
    pub n: usize,
    pub family: ChannelFamily,
    pub source: SourceSpec,
    #[serde(default = "default_budget")]
    pub budget: f64,
}

fn default_budget() -> f64 {
    DEFAULT_BUDGET
}

impl GameInstance {
    pub fn new(k: usize, n: usize, family: ChannelFamily, source: SourceSpec) -> Result<Self> {
        if k == 0 || n == 0 {
            return Err(Error::Parameter(format!("k = {k} and n = {n} must be at least 1")));
        }
        Ok(Self {
            k,
            n,
            family,
            source,
            budget: DEFAULT_BUDGET,
        })
    }

    pub fn with_budget(mut self, budget: f64) -> Self {
        self.budget = budget;
        self
    }

    /// Same family and source at another blocklength pair.
    pub fn resized(&self, k: usize, n: usize) -> Result<Self> {
        Ok(Self::new(k, n, self.family.clone(), self.source.clone())?.with_budget(self.budget))
    }

    pub fn s_space(&self) -> SeqSpace {
        SeqSpace::new(self.source.size(), self.k)
    }
    pub fn x_space(&self) -> SeqSpace {
        SeqSpace::new(self.family.x_size, self.n)
    }
    pub fn y_space(&self) -> SeqSpace {
        SeqSpace::new(self.family.y_size, self.n)
    }
    pub fn t_space(&self) -> SeqSpace {
        SeqSpace::new(self.family.t_size, self.n)
    }

    /// Guard on the sizes of the sequence spaces used by every exact routine.
    pub fn check_tables(&self) -> Result<()> {
        let ns = self.s_space().size_f64();
        let nx = self.x_space().size_f64();
        let ny = self.y_space().size_f64();
        let nt = self.t_space().size_f64();
        check_budget("sequence tables", nx * ny * nt + ns * ns, self.budget)
    }

    /// `log10` of the number of deterministic codes, `|X^n|^|S^k| * |S^k|^|Y^n|`.
    pub fn log10_code_count(&self) -> f64 {
        let ns = self.s_space().size_f64();
        let nx = self.x_space().size_f64();
        let ny = self.y_space().size_f64();
        ns * nx.log10() + ny * ns.log10()
    }

    pub fn p_s_seq(&self) -> Vec<f64> {
        iid_weights(self.source.p_s.probs(), self.k)
    }

    /// `err[s * |S^k| + ŝ]` is true when `d(s, ŝ)` exceeds the threshold.
    pub fn error_table(&self) -> Vec<bool> {
        let sp = self.s_space();
        let ns = sp.size();
        let mut a = vec![0; self.k];
        let mut b = vec![0; self.k];
        let mut out = vec![false; ns * ns];
        for s in 0..ns {
            sp.decode(s, &mut a);
            for sh in 0..ns {
                sp.decode(sh, &mut b);
                let d: f64 = a.iter().zip(&b).map(|(&x, &y)| self.source.d(x, y)).sum::<f64>() / self.k as f64;
                out[s * ns + sh] = d > self.source.d_max + DISTORTION_EPS;
            }
        }
        out
    }

    /// Sequence channel `W(y|x,θ)` for a state sequence, laid out `[x][y]`.
    pub fn seq_channel(&self, theta: usize) -> Vec<f64> {
        let ts = self.t_space();
        let states = ts.digits(theta);
        product_channel(&self.family, &states)
    }

    /// All sequence channels, `[θ][x][y]`.
    pub fn all_seq_channels(&self) -> Vec<Vec<f64>> {
        (0..self.t_space().size()).map(|t| self.seq_channel(t)).collect()
    }

    /// `P_{Y_q|X}` for a jammer law over state sequences.
    pub fn averaged_seq_channel(&self, q: &[f64]) -> Result<Vec<f64>> {
        let nt = self.t_space().size();
        if q.len() != nt {
            return Err(Error::Dimension(format!("jammer law has {} entries, expected {nt}", q.len())));
        }
        let size = self.x_space().size() * self.y_space().size();
        let mut out = vec![0.0; size];
        for (t, &qt) in q.iter().enumerate() {
            if qt == 0.0 {
                continue;
            }
            for (o, w) in out.iter_mut().zip(self.seq_channel(t)) {
                *o += qt * w;
            }
        }
        Ok(out)
    }
}

/// Memoryless product of per-letter channels selected by `states`.
pub fn product_channel(family: &ChannelFamily, states: &[usize]) -> Vec<f64> {
    let (xs, ys) = (family.x_size, family.y_size);
    let mut cur = vec![1.0];
    let (mut nx, mut ny) = (1usize, 1usize);
    for &t in states {
        let mut next = vec![0.0; nx * xs * ny * ys];
        let stride = ny * ys;
        for bx in 0..nx {
            for by in 0..ny {
                let base = cur[bx * ny + by];
                if base == 0.0 {
                    continue;
                }
                for x in 0..xs {
                    let row = family.row(t, x);
                    let r = (bx * xs + x) * stride;
                    for (y, &w) in row.iter().enumerate() {
                        next[r + by * ys + y] = base * w;
                    }
                }
            }
        }
        cur = next;
        nx *= xs;
        ny *= ys;
    }
    cur
}

/// Product of a per-letter channel matrix over `n` uses, `[x][y]`.
pub fn product_of(ch: &super::channel::Channel, n: usize) -> Vec<f64> {
    let fam = ChannelFamily::from_channels(std::slice::from_ref(ch)).expect("valid channel");
    product_channel(&fam, &vec![0; n])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::dist::Dist;

    #[test]
    fn product_channel_entries() {
        let fam = ChannelFamily::bsc_family(&[0.1, 0.2]);
        let src = SourceSpec::hamming(Dist::uniform(2), 0.0);
        let inst = GameInstance::new(1, 2, fam, src).unwrap();
        // θ = (0, 1): first letter BSC(0.1), second BSC(0.2)
        let w = inst.seq_channel(1);
        // x = (0,0) -> idx 0 ; y = (0,1) -> idx 1
        assert!((w[1] - 0.9 * 0.2).abs() < 1e-15);
        // x = (1,0) -> idx 2 ; y = (0,0)
        assert!((w[2 * 4] - 0.1 * 0.8).abs() < 1e-15);
        for x in 0..4 {
            let s: f64 = w[x * 4..x * 4 + 4].iter().sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn error_table_hamming() {
        let fam = ChannelFamily::bsc_family(&[0.1]);
        let src = SourceSpec::hamming(Dist::uniform(2), 0.5);
        let inst = GameInstance::new(2, 1, fam, src).unwrap();
        let e = inst.error_table();
        // (0,0) vs (1,1) is an error; (0,0) vs (0,1) is not
        assert!(e[3]);
        assert!(!e[1]);
    }
}
