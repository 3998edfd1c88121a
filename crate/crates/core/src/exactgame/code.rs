//! Code tables and the flat enumeration of deterministic codes.
//!
//! A deterministic code is an encoder table `S^k -> X^n` followed by a
//! decoder table `Y^n -> S^k`. Its flat index puts the encoder in the most
//! significant position; inside each table the entry for the first sequence
//! is the most significant digit, so flat order is lexicographic order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::seq::check_budget;
use crate::model::GameInstance;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterministicCode {
    pub enc: Vec<usize>,
    pub dec: Vec<usize>,
}

/// Stochastic encoder `Q(x|s)` laid out `[s][x]` and decoder `Q(ŝ|y)` laid out `[y][ŝ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticCode {
    pub enc: Vec<f64>,
    pub dec: Vec<f64>,
}

/// Dense tables shared by all exact computations on one instance.
#[derive(Debug, Clone)]
pub struct GameTables {
    pub ns: usize,
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
    pub p_s: Vec<f64>,
    pub err: Vec<bool>,
    /// `w[θ][x * ny + y]`.
    pub w: Vec<Vec<f64>>,
}

impl GameTables {
    pub fn new(inst: &GameInstance) -> Result<Self> {
        inst.check_tables()?;
        Ok(Self {
            ns: inst.s_space().size(),
            nx: inst.x_space().size(),
            ny: inst.y_space().size(),
            nt: inst.t_space().size(),
            p_s: inst.p_s_seq(),
            err: inst.error_table(),
            w: inst.all_seq_channels(),
        })
    }

    #[inline]
    pub fn is_err(&self, s: usize, sh: usize) -> bool {
        self.err[s * self.ns + sh]
    }

    pub fn encoder_count(&self) -> f64 {
        (self.nx as f64).powi(self.ns as i32)
    }

    pub fn decoder_count(&self) -> f64 {
        (self.ns as f64).powi(self.ny as i32)
    }

    pub fn code_count(&self) -> f64 {
        self.encoder_count() * self.decoder_count()
    }

    /// `P_{Y_q|X}` as `[x * ny + y]`.
    pub fn averaged(&self, q: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nx * self.ny];
        for (t, &qt) in q.iter().enumerate() {
            if qt != 0.0 {
                for (o, w) in out.iter_mut().zip(&self.w[t]) {
                    *o += qt * w;
                }
            }
        }
        out
    }

    pub fn check_code_budget(&self, budget: f64) -> Result<()> {
        check_budget("deterministic code enumeration", self.code_count(), budget)
    }

    pub fn code_from_index(&self, mut idx: u128) -> DeterministicCode {
        let mut dec = vec![0; self.ny];
        for slot in dec.iter_mut().rev() {
            *slot = (idx % self.ns as u128) as usize;
            idx /= self.ns as u128;
        }
        let mut enc = vec![0; self.ns];
        for slot in enc.iter_mut().rev() {
            *slot = (idx % self.nx as u128) as usize;
            idx /= self.nx as u128;
        }
        DeterministicCode { enc, dec }
    }

    pub fn code_index(&self, code: &DeterministicCode) -> u128 {
        let e = code.enc.iter().fold(0u128, |a, &d| a * self.nx as u128 + d as u128);
        code.dec.iter().fold(e, |a, &d| a * self.ns as u128 + d as u128)
    }

    pub fn check_code(&self, code: &DeterministicCode) -> Result<()> {
        if code.enc.len() != self.ns || code.dec.len() != self.ny {
            return Err(Error::Dimension(format!(
                "code tables have {} and {} entries, expected {} and {}",
                code.enc.len(),
                code.dec.len(),
                self.ns,
                self.ny
            )));
        }
        if code.enc.iter().any(|&x| x >= self.nx) || code.dec.iter().any(|&s| s >= self.ns) {
            return Err(Error::Dimension("code table entry out of range".into()));
        }
        Ok(())
    }

    pub fn check_stochastic(&self, code: &StochasticCode) -> Result<()> {
        if code.enc.len() != self.ns * self.nx || code.dec.len() != self.ny * self.ns {
            return Err(Error::Dimension("stochastic code has the wrong shape".into()));
        }
        for (name, rows, width) in [("encoder", &code.enc, self.nx), ("decoder", &code.dec, self.ns)] {
            for (i, row) in rows.chunks(width).enumerate() {
                let s: f64 = row.iter().sum();
                if row.iter().any(|v| *v < -1e-12 || !v.is_finite()) || (s - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidDistribution(format!("{name} row {i} is not a distribution")));
                }
            }
        }
        Ok(())
    }

    pub fn uniform_code(&self) -> StochasticCode {
        StochasticCode {
            enc: vec![1.0 / self.nx as f64; self.ns * self.nx],
            dec: vec![1.0 / self.ns as f64; self.ny * self.ns],
        }
    }

    pub fn to_stochastic(&self, code: &DeterministicCode) -> StochasticCode {
        let mut enc = vec![0.0; self.ns * self.nx];
        for (s, &x) in code.enc.iter().enumerate() {
            enc[s * self.nx + x] = 1.0;
        }
        let mut dec = vec![0.0; self.ny * self.ns];
        for (y, &sh) in code.dec.iter().enumerate() {
            dec[y * self.ns + sh] = 1.0;
        }
        StochasticCode { enc, dec }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ChannelFamily, Dist, SourceSpec};

    #[test]
    fn index_round_trip() {
        let inst = GameInstance::new(
            1,
            1,
            ChannelFamily::bsc_family(&[0.1, 0.2]),
            SourceSpec::hamming(Dist::uniform(2), 0.0),
        )
        .unwrap();
        let t = GameTables::new(&inst).unwrap();
        assert_eq!(t.code_count(), 16.0);
        for i in 0..16u128 {
            assert_eq!(t.code_index(&t.code_from_index(i)), i);
        }
        // encoder is the most significant part
        assert_eq!(t.code_from_index(4).enc, vec![0, 1]);
        assert_eq!(t.code_from_index(1).dec, vec![0, 1]);
    }
}
