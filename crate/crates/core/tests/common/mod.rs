//! Seeded corpus of tiny games shared by the integration tests.
#![allow(dead_code)]

use avcgame::model::{ChannelFamily, Dist, GameInstance, SourceSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_dist(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    // occasional exact zeros exercise the degenerate branches
    let w: Vec<f64> = (0..n)
        .map(|_| if n > 1 && rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.05..1.0) })
        .collect();
    let s: f64 = w.iter().sum();
    if s == 0.0 {
        return vec![1.0 / n as f64; n];
    }
    w.into_iter().map(|v| v / s).collect()
}

pub fn random_family(rng: &mut ChaCha8Rng, nx: usize, ny: usize, nt: usize) -> ChannelFamily {
    let w = (0..nt)
        .map(|_| (0..nx).map(|_| random_dist(rng, ny)).collect())
        .collect();
    ChannelFamily::new(w).unwrap()
}

pub fn random_source(rng: &mut ChaCha8Rng, ns: usize) -> SourceSpec {
    let p = Dist::from_weights(random_dist(rng, ns)).unwrap();
    let d_max = [0.0, 0.25, 0.5, 0.75][rng.random_range(0..4)];
    if rng.random_bool(0.5) {
        return SourceSpec::hamming(p, d_max);
    }
    let d_mat = (0..ns)
        .map(|i| {
            (0..ns)
                .map(|j| if i == j { 0.0 } else { [0.5, 1.0, 2.0][rng.random_range(0..3)] })
                .collect()
        })
        .collect();
    SourceSpec::new(p, d_mat, d_max).unwrap()
}

/// `count_single` instances with `k = n = 1` and alphabets of size at most 3,
/// followed by `count_binary` binary instances with `k = 1, n = 2`.
pub fn corpus(seed: u64, count_single: usize, count_binary: usize) -> Vec<GameInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..count_single {
        let ns = rng.random_range(1..=3);
        let nx = rng.random_range(1..=3);
        let ny = rng.random_range(1..=3);
        let nt = rng.random_range(1..=3);
        let fam = random_family(&mut rng, nx, ny, nt);
        out.push(GameInstance::new(1, 1, fam, random_source(&mut rng, ns)).unwrap());
    }
    for _ in 0..count_binary {
        let fam = random_family(&mut rng, 2, 2, 2);
        out.push(GameInstance::new(1, 2, fam, random_source(&mut rng, 2)).unwrap());
    }
    out
}

pub fn bsc_jam(d_max: f64) -> GameInstance {
    GameInstance::new(1, 1, ChannelFamily::bsc_family(&[0.1, 0.2]), SourceSpec::hamming(Dist::uniform(2), d_max)).unwrap()
}
