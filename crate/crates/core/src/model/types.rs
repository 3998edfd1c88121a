use serde::{Deserialize, Serialize};

use super::dist::Dist;
use crate::error::{Error, Result};

/// Composition of a length-`m` sequence: letter counts summing to `m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TypeClass {
    pub counts: Vec<usize>,
}

impl TypeClass {
    pub fn of(seq: &[usize], alphabet: usize) -> Self {
        let mut counts = vec![0; alphabet];
        for &a in seq {
            counts[a] += 1;
        }
        Self { counts }
    }

    pub fn len(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn empirical(&self) -> Dist {
        let m = self.len() as f64;
        Dist::from_weights(self.counts.iter().map(|&c| c as f64 / m).collect()).expect("nonempty type")
    }
}

/// Number of types `C(m + a - 1, a - 1)`, or `None` on overflow.
pub fn type_count(a: usize, m: usize) -> Option<u128> {
    let n = (m + a - 1) as u128;
    let r = (a - 1).min(m) as u128;
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// All compositions of `m` into `a` parts, ordered with the first count
/// descending: for `a = 2, m = 2` the order is (2,0), (1,1), (0,2).
pub fn enumerate_types(a: usize, m: usize) -> Result<Vec<TypeClass>> {
    if a == 0 || m == 0 {
        return Err(Error::Parameter("alphabet size and length must be positive".into()));
    }
    let count = type_count(a, m).ok_or_else(|| Error::Budget {
        what: "type enumeration".into(),
        needed: f64::INFINITY,
        budget: 1e8,
    })?;
    if count > 100_000_000 {
        return Err(Error::Budget {
            what: "type enumeration".into(),
            needed: count as f64,
            budget: 1e8,
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut counts = vec![0; a];
    fill(&mut counts, 0, m, &mut out);
    Ok(out)
}

fn fill(counts: &mut [usize], pos: usize, left: usize, out: &mut Vec<TypeClass>) {
    if pos == counts.len() - 1 {
        counts[pos] = left;
        out.push(TypeClass { counts: counts.to_vec() });
        return;
    }
    for c in (0..=left).rev() {
        counts[pos] = c;
        fill(counts, pos + 1, left - c, out);
    }
}
