use avcgame::model::{binary_entropy, Channel, ChannelFamily, Dist, SourceSpec};
use avcgame::singleletter::capacity::max_info_over_inputs;
use avcgame::singleletter::info::info_density;
use avcgame::singleletter::symmetrize::{margin_objective, JointLayout};
use avcgame::singleletter::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_dist(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

fn random_family(rng: &mut ChaCha8Rng) -> ChannelFamily {
    let nx = rng.random_range(2..=4);
    let ny = rng.random_range(2..=4);
    let nt = rng.random_range(1..=4);
    let w = (0..nt)
        .map(|_| (0..nx).map(|_| random_dist(rng, ny)).collect())
        .collect();
    ChannelFamily::new(w).unwrap()
}

#[test]
fn averaged_channel_examples() {
    let fam = ChannelFamily::bsc_family(&[0.1, 0.2]);
    let w = averaged_channel(&fam, &Dist::new(vec![0.5, 0.5]).unwrap()).unwrap();
    assert!((w.get(0, 1) - 0.15).abs() < 1e-15);
    let w0 = averaged_channel(&fam, &Dist::point(2, 0)).unwrap();
    assert_eq!(w0.get(1, 0), 0.1);
}

#[test]
fn density_expectation_is_mutual_information() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let fam = random_family(&mut rng);
        let p = random_dist(&mut rng, fam.x_size);
        let q = random_dist(&mut rng, fam.t_size);
        let w = fam.averaged(&q).unwrap();
        let mut e = 0.0;
        for x in 0..fam.x_size {
            for y in 0..fam.y_size {
                e += p[x] * w.get(x, y) * info_density(&p, &w, x, y).unwrap();
            }
        }
        assert!((e - mutual_information(&p, &w)).abs() < 1e-10);
    }
}

#[test]
fn capacity_closed_forms() {
    let c = avc_capacity(&ChannelFamily::bsc_family(&[0.1]), 1e-9).unwrap();
    assert!((c.c_bits - (1.0 - binary_entropy(0.1))).abs() < 1e-6);
    let c = avc_capacity(&ChannelFamily::bsc_family(&[0.1, 0.2]), 1e-9).unwrap();
    assert!((c.c_bits - (1.0 - binary_entropy(0.2))).abs() < 1e-6);
    assert!(c.q_theta_star[1] > 0.999);
    let ch = Channel::new(vec![vec![0.6, 0.3, 0.1], vec![0.2, 0.2, 0.6]]).unwrap();
    let fam = ChannelFamily::from_channels(&[ch.clone(), ch.clone(), ch.clone()]).unwrap();
    let single = avc_capacity(&ChannelFamily::from_channels(&[ch]).unwrap(), 1e-9).unwrap();
    let triple = avc_capacity(&fam, 1e-9).unwrap();
    assert!((single.c_bits - triple.c_bits).abs() < 1e-8);
}

/// Grid oracle for the min-max side: `min_q max_P I` by brute force on |T| = 2.
#[test]
fn capacity_matches_grid_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let nx = 2;
        let ny = rng.random_range(2..=3);
        let w = (0..2)
            .map(|_| (0..nx).map(|_| random_dist(&mut rng, ny)).collect())
            .collect();
        let fam = ChannelFamily::new(w).unwrap();
        let caps = avc_capacity(&fam, 1e-9).unwrap();
        let mut oracle = f64::INFINITY;
        for i in 0..=2000 {
            let q = [i as f64 / 2000.0, 1.0 - i as f64 / 2000.0];
            let wq = fam.averaged(&q).unwrap();
            let mut best: f64 = 0.0;
            for j in 0..=2000 {
                let p = [j as f64 / 2000.0, 1.0 - j as f64 / 2000.0];
                best = best.max(mutual_information(&p, &wq));
            }
            oracle = oracle.min(best);
        }
        // grid error is second order in the spacing
        assert!((caps.c_bits - oracle).abs() < 1e-5, "{} vs {}", caps.c_bits, oracle);
    }
}

#[test]
fn saddle_check_on_random_families() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..30 {
        let fam = random_family(&mut rng);
        let caps = avc_capacity(&fam, 1e-8).unwrap();
        assert!(caps.gap <= 1e-8);
        let maxmin = min_info_over_states(&fam, caps.p_x_star.probs(), 1e-10).unwrap().value;
        let (minmax, _) = max_info_over_inputs(&fam, caps.q_theta_star.probs()).unwrap();
        assert!((minmax - maxmin).abs() <= 1e-5, "{minmax} vs {maxmin}");
        assert!(caps.c_bits >= 0.0 && caps.c_bits <= (fam.y_size as f64).log2());
    }
}

/// Plain fixed-point Blahut-Arimoto with golden-section search on the slope.
fn rd_oracle(p: &[f64], d: &[Vec<f64>], d_max: f64) -> f64 {
    let a = p.len();
    let run = |beta: f64| -> (f64, f64) {
        let mut r = vec![1.0 / a as f64; a];
        for _ in 0..20000 {
            let mut next = vec![0.0; a];
            for s in 0..a {
                let z: f64 = (0..a).map(|t| r[t] * (-beta * d[s][t]).exp()).sum();
                for t in 0..a {
                    next[t] += p[s] * r[t] * (-beta * d[s][t]).exp() / z;
                }
            }
            r = next;
        }
        let mut rate = 0.0;
        let mut dist = 0.0;
        for s in 0..a {
            let z: f64 = (0..a).map(|t| r[t] * (-beta * d[s][t]).exp()).sum();
            for t in 0..a {
                let c = r[t] * (-beta * d[s][t]).exp() / z;
                if c > 0.0 {
                    rate += p[s] * c * (c / r[t]).log2();
                    dist += p[s] * c * d[s][t];
                }
            }
        }
        (rate, dist)
    };
    // minimise (D(β) - d_max)^2 over β by bisection on the monotone D
    let (mut lo, mut hi) = (0.0f64, 60.0f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if run(mid).1 > d_max {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    run(0.5 * (lo + hi)).0
}

#[test]
fn rate_distortion_against_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..6 {
        let a = rng.random_range(2..=3);
        let p = random_dist(&mut rng, a);
        let d: Vec<Vec<f64>> = (0..a)
            .map(|i| (0..a).map(|j| if i == j { 0.0 } else { rng.random_range(0.5..2.0) }).collect())
            .collect();
        let src0 = SourceSpec::new(Dist::new(p.clone()).unwrap(), d.clone(), 0.0).unwrap();
        let dc = src0.best_constant().0;
        let d_max = 0.3 * dc;
        let src = SourceSpec::new(Dist::new(p.clone()).unwrap(), d.clone(), d_max).unwrap();
        let rd = rate_distortion(&src, 1e-13).unwrap();
        let oracle = rd_oracle(&p, &d, d_max);
        assert!((rd.r_bits - oracle).abs() < 1e-6, "{} vs {}", rd.r_bits, oracle);
        let ej: f64 = (0..a).map(|s| p[s] * d_tilted_info(&src, &rd, s)).sum();
        assert!((ej - rd.r_bits).abs() < 1e-6);
    }
}

#[test]
fn rate_distortion_monotone_in_threshold() {
    let p = Dist::new(vec![0.5, 0.3, 0.2]).unwrap();
    let mut last = f64::INFINITY;
    for i in 0..=20 {
        let src = SourceSpec::hamming(p.clone(), i as f64 * 0.03);
        let r = rate_distortion(&src, 1e-12).unwrap().r_bits;
        assert!(r <= last + 1e-12);
        last = r;
    }
}

#[test]
fn tilted_information_examples() {
    let src = SourceSpec::hamming(Dist::uniform(2), 0.11);
    let rd = rate_distortion(&src, 1e-12).unwrap();
    assert!((rd.r_bits - (1.0 - binary_entropy(0.11))).abs() < 1e-6);
    for s in 0..2 {
        assert!((d_tilted_info(&src, &rd, s) - rd.r_bits).abs() < 1e-9);
    }
    let src = SourceSpec::hamming(Dist::new(vec![0.7, 0.3]).unwrap(), 0.0);
    let rd = rate_distortion(&src, 1e-12).unwrap();
    assert!((d_tilted_info(&src, &rd, 1) - (1.0f64 / 0.3).log2()).abs() < 1e-9);
}

/// The symmetrizing joint for XOR written out by hand:
/// `Q = P(x)P(x')1{θ=x'}1{θ'=x}1{y = x⊕x'}`.
#[test]
fn xor_margin_vanishes_at_explicit_joint() {
    let fam = ChannelFamily::xor();
    let l = JointLayout::of(&fam);
    let mut q = vec![0.0; l.size()];
    for x in 0..2 {
        for xp in 0..2 {
            q[l.idx(x, xp, xp, x, x ^ xp)] = 0.25;
        }
    }
    let (d1, d2) = margin_objective(&fam, &Dist::uniform(2), &q).unwrap();
    assert!(d1.max(d2) < 1e-12);
    let m = symmetrizability_margin(&fam, &Dist::uniform(2), 16, 9).unwrap();
    assert!(m.eta_hat <= 1e-6);
}

#[test]
fn symmetrizability_direction() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..5 {
        let fam = random_family(&mut rng);
        let p = Dist::uniform(fam.x_size);
        let sym = is_symmetrizable(&fam).unwrap().symmetrizable;
        let m = symmetrizability_margin(&fam, &p, 8, 1).unwrap();
        if sym {
            assert!(m.eta_hat <= 1e-6);
        } else {
            assert!(m.eta_hat >= 1e-4, "{}", m.eta_hat);
        }
    }
    let single = ChannelFamily::bsc_family(&[0.1]);
    assert!(!is_symmetrizable(&single).unwrap().symmetrizable);
}

#[test]
fn dispersion_examples() {
    let fam = ChannelFamily::bsc_family(&[0.1, 0.2]);
    let caps = avc_capacity(&fam, 1e-9).unwrap();
    let src = SourceSpec::hamming(Dist::uniform(2), 0.11);
    let rd = rate_distortion(&src, 1e-12).unwrap();
    let d = dispersions(&fam, &src, &caps, &rd, &DispersionOptions::default()).unwrap();
    let v = 0.16 * (1.6f64.log2() - 0.4f64.log2()).powi(2);
    assert!((d.v_c_plus - v).abs() < 1e-6);
    assert!(d.v_c_minus <= d.v_c_plus + 1e-15 && d.v_c_plus <= d.v0 + 1e-15);
    assert!(d.unique_q_star && d.v_s < 1e-12);

    let flat = Channel::new(vec![vec![0.4, 0.6], vec![0.4, 0.6]]).unwrap();
    let fam = ChannelFamily::from_channels(&[flat]).unwrap();
    let caps = avc_capacity(&fam, 1e-9).unwrap();
    assert!(caps.c_bits.abs() < 1e-8);
    let d = dispersions(&fam, &src, &caps, &rd, &DispersionOptions::default()).unwrap();
    assert!(d.v_c_plus < 1e-12 && d.v_c_minus < 1e-12 && d.v0 < 1e-12);
}
