#![allow(clippy::needless_range_loop)]

use avcgame::error::Error;
use avcgame::exactgame::{error_probability, Code, DeterministicCode, Jam};
use avcgame::fbbounds::{default_t7_gamma_grid, theorem8_bound, BoundParams, Theorem7Inputs, Theorem8Inputs};
use avcgame::lprelax::Evaluation;
use avcgame::model::{ChannelFamily, Dist, GameInstance, SourceSpec};
use avcgame::simulator::*;

fn digits(mut i: usize, radix: usize, len: usize) -> Vec<usize> {
    let mut d = vec![0; len];
    for slot in d.iter_mut().rev() {
        *slot = i % radix;
        i /= radix;
    }
    d
}

fn distortion(src: &SourceSpec, a: &[usize], b: &[usize]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| src.d(x, y)).sum::<f64>() / a.len() as f64
}

fn iid(p: &[f64], seq: &[usize]) -> f64 {
    seq.iter().map(|&a| p[a]).product()
}

fn pow(r: usize, n: usize) -> usize {
    r.pow(n as u32)
}

/// Direct sum over source and output sequences.
fn oracle_error(inst: &GameInstance, code: &DeterministicCode, theta: &[usize]) -> f64 {
    let fam = &inst.family;
    let (k, n) = (inst.k, inst.n);
    let src = &inst.source;
    let mut e = 0.0;
    for s in 0..pow(src.size(), k) {
        let sd = digits(s, src.size(), k);
        let xd = digits(code.enc[s], fam.x_size, n);
        for y in 0..pow(fam.y_size, n) {
            let yd = digits(y, fam.y_size, n);
            let w: f64 = (0..n).map(|i| fam.w(theta[i], xd[i], yd[i])).product();
            let sh = digits(code.dec[y], src.size(), k);
            if distortion(src, &sd, &sh) > src.d_max + 1e-12 {
                e += iid(src.p_s.probs(), &sd) * w;
            }
        }
    }
    e
}

/// Rebuilds the code from its codebooks straight from the construction.
fn oracle_build(inst: &GameInstance, spec: &RandomCodeSpec, sbook: &[usize], xbook: &[usize]) -> DeterministicCode {
    let fam = &inst.family;
    let (k, n) = (inst.k, inst.n);
    let src = &inst.source;
    let ns = pow(src.size(), k);
    let ok = |s: usize, sh: usize| {
        distortion(src, &digits(s, src.size(), k), &digits(sh, src.size(), k)) <= src.d_max + 1e-12
    };
    let mut enc = vec![0; ns];
    let mut p_u = vec![0.0; spec.m];
    for s in 0..ns {
        let ball: f64 = (0..ns)
            .filter(|&sh| ok(s, sh))
            .map(|sh| iid(spec.p_shat.probs(), &digits(sh, src.size(), k)))
            .sum();
        let l = ((spec.gamma_l / ball).floor() as usize).clamp(1, spec.m);
        let m = (0..spec.m).find(|&j| ok(s, sbook[j])).unwrap_or(usize::MAX);
        let j = m.min(l - 1);
        enc[s] = xbook[j];
        if ok(s, sbook[j]) {
            p_u[j] += iid(src.p_s.probs(), &digits(s, src.size(), k));
        }
    }
    let nt = pow(fam.t_size, n);
    let mut dec = vec![0; pow(fam.y_size, n)];
    for (y, slot) in dec.iter_mut().enumerate() {
        let yd = digits(y, fam.y_size, n);
        let mut best = (-1.0, 0);
        for j in 0..spec.m {
            let xd = digits(xbook[j], fam.x_size, n);
            let mut w = 0.0;
            for th in 0..nt {
                let td = digits(th, fam.t_size, n);
                w += iid(spec.q_star.probs(), &td) * (0..n).map(|i| fam.w(td[i], xd[i], yd[i])).product::<f64>();
            }
            if p_u[j] * w > best.0 {
                best = (p_u[j] * w, j);
            }
        }
        *slot = sbook[best.1];
    }
    DeterministicCode { enc, dec }
}

fn lossy_instance() -> GameInstance {
    let src = SourceSpec::hamming(Dist::new(vec![0.6, 0.4]).unwrap(), 0.5);
    GameInstance::new(2, 2, ChannelFamily::bsc_family(&[0.05, 0.2]), src).unwrap()
}

fn spec_for(inst: &GameInstance, gamma: f64, seed: u64) -> RandomCodeSpec {
    let p_shat = Dist::uniform(inst.source.size());
    RandomCodeSpec {
        m: required_codebook_size(inst, &p_shat, gamma).unwrap(),
        p_shat,
        p_x: Dist::uniform(inst.family.x_size),
        gamma_l: gamma,
        q_star: Dist::new(vec![0.3, 0.7]).unwrap(),
        seed,
    }
}

#[test]
fn sampled_code_matches_the_construction() {
    let inst = lossy_instance();
    for seed in 0..20 {
        let mut spec = spec_for(&inst, 3.0, seed);
        spec.m += (seed % 3) as usize;
        let c = sample_jscc_code(&inst, &spec).unwrap();
        assert_eq!(c.source_book.len(), spec.m);
        assert_eq!(c.code, oracle_build(&inst, &spec, &c.source_book, &c.channel_book));
    }
}

#[test]
fn lossless_covering_codebook_maps_to_first_match() {
    let src = SourceSpec::hamming(Dist::uniform(2), 0.0);
    let inst = GameInstance::new(2, 1, ChannelFamily::bsc_family(&[0.1]), src).unwrap();
    let mut covered = 0;
    for seed in 0..40 {
        let spec = RandomCodeSpec {
            m: 4,
            p_shat: Dist::uniform(2),
            p_x: Dist::uniform(2),
            gamma_l: 1e6,
            q_star: Dist::uniform(1),
            seed,
        };
        let c = sample_jscc_code(&inst, &spec).unwrap();
        let mut book = c.source_book.clone();
        book.sort();
        book.dedup();
        if book.len() == 4 {
            covered += 1;
            for s in 0..4 {
                let first = c.source_book.iter().position(|&sh| sh == s).unwrap();
                assert_eq!(c.index_of[s], first);
            }
        }
    }
    // 4!/4^4 ≈ 0.094 per draw
    assert!(covered > 0);
}

#[test]
fn noiseless_channel_decodes_distinct_codewords() {
    let src = SourceSpec::hamming(Dist::new(vec![0.7, 0.3]).unwrap(), 0.5);
    let fam = ChannelFamily::from_channels(&[avcgame::model::Channel::identity(3)]).unwrap();
    let inst = GameInstance::new(2, 2, fam, src).unwrap();
    let mut checked = 0;
    for seed in 0..30 {
        let spec = RandomCodeSpec {
            m: 3,
            p_shat: Dist::uniform(2),
            p_x: Dist::uniform(3),
            gamma_l: 2.0,
            q_star: Dist::uniform(1),
            seed,
        };
        let c = sample_jscc_code(&inst, &spec).unwrap();
        let mut xs = c.channel_book.clone();
        xs.sort();
        xs.dedup();
        if xs.len() < spec.m {
            continue;
        }
        for j in 0..spec.m {
            if c.weights[j] > 0.0 {
                checked += 1;
                assert_eq!(c.code.dec[c.channel_book[j]], c.source_book[j]);
            }
        }
    }
    assert!(checked > 0);
}

#[test]
fn degenerate_ball_is_an_error() {
    let src = SourceSpec::hamming(Dist::uniform(2), 0.0);
    let inst = GameInstance::new(1, 1, ChannelFamily::bsc_family(&[0.1]), src).unwrap();
    let spec = RandomCodeSpec {
        m: 2,
        p_shat: Dist::point(2, 0),
        p_x: Dist::uniform(2),
        gamma_l: 1.0,
        q_star: Dist::uniform(1),
        seed: 0,
    };
    assert!(matches!(sample_jscc_code(&inst, &spec), Err(Error::DegenerateBall(1))));
    assert!(matches!(required_codebook_size(&inst, &spec.p_shat, 1.0), Err(Error::DegenerateBall(1))));
}

#[test]
fn per_theta_errors_match_enumeration() {
    let inst = lossy_instance();
    let t = avcgame::exactgame::GameTables::new(&inst).unwrap();
    for seed in 0..10 {
        let c = sample_jscc_code(&inst, &spec_for(&inst, 2.0, seed)).unwrap();
        let errs = per_theta_errors(&t, &c.code);
        for (th, &e) in errs.iter().enumerate() {
            let direct = oracle_error(&inst, &c.code, &digits(th, 2, inst.n));
            let lib = error_probability(&inst, &Code::Deterministic(c.code.clone()), &Jam::State(th)).unwrap();
            assert!((e - direct).abs() < 1e-12, "{e} vs {direct}");
            assert!((e - lib).abs() < 1e-12);
        }
    }
}

#[test]
fn reduction_edge_cases() {
    // a single state: one column
    let src = SourceSpec::hamming(Dist::new(vec![0.6, 0.4]).unwrap(), 0.5);
    let inst = GameInstance::new(2, 2, ChannelFamily::bsc_family(&[0.1]), src).unwrap();
    let mut spec = spec_for(&inst, 2.0, 5);
    spec.q_star = Dist::uniform(1);
    assert_eq!(cond_k(1, inst.n, 0.3).unwrap(), 1);
    let r = reduce_random_code(&inst, &spec, 3, 0, Some(1.0)).unwrap();
    let avg = r.per_theta_average(&inst).unwrap();
    assert_eq!(avg.len(), 1);
    let direct: f64 = r.codes.iter().map(|c| oracle_error(&inst, c, &[0, 0])).sum::<f64>() / 3.0;
    assert!((avg[0] - direct).abs() < 1e-12);
    let v = r.validation.unwrap();
    assert!(v.passed && (v.worst_average - direct).abs() < 1e-12);

    // K = 1: the average is the code's own error
    let inst = lossy_instance();
    let spec = spec_for(&inst, 2.0, 9);
    let r = reduce_random_code(&inst, &spec, 1, 0, None).unwrap();
    assert_eq!(r.k, 1);
    assert!(r.validation.is_none());
    let avg = r.per_theta_average(&inst).unwrap();
    for (th, a) in avg.iter().enumerate() {
        assert!((a - oracle_error(&inst, &r.codes[0], &digits(th, 2, 2))).abs() < 1e-12);
    }
    assert!(reduce_random_code(&inst, &spec, 0, 0, None).is_err());
}

#[test]
fn reduction_reports_failure_with_the_worst_state() {
    let inst = lossy_instance();
    let spec = spec_for(&inst, 2.0, 4);
    let r = reduce_random_code(&inst, &spec, 4, 2, Some(1e-9)).unwrap();
    let v = r.validation.clone().unwrap();
    assert!(!v.passed);
    assert_eq!(v.attempts, 2);
    let avg = r.per_theta_average(&inst).unwrap();
    let worst = (0..avg.len()).max_by(|&a, &b| avg[a].total_cmp(&avg[b])).unwrap();
    assert!((avg[worst] - v.worst_average).abs() < 1e-15);
}

#[test]
fn reduction_with_cond_k_usually_passes_early() {
    let inst = lossy_instance();
    let mut early = 0;
    let seeds = 20;
    for seed in 0..seeds {
        let spec = spec_for(&inst, 2.0, 100 + seed);
        let target = ensemble_error(&inst, &spec, 200, 7 + seed).unwrap().value;
        let k = cond_k(inst.family.t_size, inst.n, target).unwrap();
        let r = reduce_random_code(&inst, &spec, k, 30, Some(target)).unwrap();
        let v = r.validation.unwrap();
        assert!(v.passed, "seed {seed}: worst {} vs target {target}", v.worst_average);
        if v.attempts <= 1 {
            early += 1;
        }
    }
    assert!(early * 2 >= seeds, "only {early} of {seeds} passed on the first or second draw");
}

#[test]
fn monte_carlo_matches_exact_error() {
    let inst = lossy_instance();
    let c = sample_jscc_code(&inst, &spec_for(&inst, 2.0, 1)).unwrap();
    let theta = vec![1, 0];
    let exact = oracle_error(&inst, &c.code, &theta);
    let trials = 2000;
    let tol = 3.0 * (exact * (1.0 - exact) / trials as f64).sqrt();
    let runs = 100usize;
    let inside = (0..runs as u64)
        .filter(|&seed| {
            let r = simulate_code(&inst, &c.code, &JammerStrategy::fixed(theta.clone()), trials, seed, 0).unwrap();
            (r.estimate - exact).abs() <= tol
        })
        .count();
    assert!(inside * 100 >= 99 * runs, "{inside} of {runs} runs within 3 sigma");
}

#[test]
fn simulation_is_seed_deterministic() {
    let inst = lossy_instance();
    let spec = spec_for(&inst, 2.0, 11);
    assert_eq!(sample_jscc_code(&inst, &spec).unwrap(), sample_jscc_code(&inst, &spec).unwrap());
    let jam = JammerStrategy::iid(Dist::new(vec![0.4, 0.6]).unwrap());
    let a = random_code_transmit(&inst, &spec, &jam, 3000, 5, 50).unwrap();
    let b = random_code_transmit(&inst, &spec, &jam, 3000, 5, 50).unwrap();
    assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
    assert_eq!(a.transcript, b.transcript);
    assert_eq!(a.transcript.len(), 50);
    let c = random_code_transmit(&inst, &spec, &jam, 3000, 6, 0).unwrap();
    assert_ne!(a.errors, c.errors);
    let r1 = reduce_random_code(&inst, &spec, 5, 0, None).unwrap();
    let r2 = reduce_random_code(&inst, &spec, 5, 0, None).unwrap();
    assert_eq!(r1.codes, r2.codes);
}

#[test]
fn transcript_rows_are_consistent() {
    let inst = lossy_instance();
    let c = sample_jscc_code(&inst, &spec_for(&inst, 2.0, 3)).unwrap();
    let r = simulate_code(&inst, &c.code, &JammerStrategy::fixed(vec![1, 1]), 200, 2, 200).unwrap();
    assert_eq!(r.transcript.len(), 200);
    for row in &r.transcript {
        assert_eq!(row.theta, "11");
        let sd: Vec<usize> = row.s.bytes().map(|b| (b - b'0') as usize).collect();
        let hd: Vec<usize> = row.s_hat.bytes().map(|b| (b - b'0') as usize).collect();
        let d = distortion(&inst.source, &sd, &hd);
        assert!((row.distortion - d).abs() < 1e-15);
        assert_eq!(row.error, d > 0.5);
    }
    assert_eq!(r.transcript.iter().filter(|r| r.error).count(), r.errors);
    assert_eq!(TranscriptRow::HEADER.split(',').count(), r.transcript[0].csv().split(',').count());
}

#[test]
fn greedy_jammer_is_a_local_maximum() {
    let src = SourceSpec::hamming(Dist::uniform(2), 0.0);
    let inst = GameInstance::new(1, 1, ChannelFamily::bsc_family(&[0.1, 0.2]), src).unwrap();
    let identity = DeterministicCode { enc: vec![0, 1], dec: vec![0, 1] };
    let g = greedy_jammer(&inst, &identity, 10).unwrap();
    assert_eq!(g.theta, vec![1]);
    assert!((g.error - 0.2).abs() < 1e-12);

    let inst = lossy_instance();
    for seed in 0..10 {
        let c = sample_jscc_code(&inst, &spec_for(&inst, 2.0, seed)).unwrap();
        let g = greedy_jammer(&inst, &c.code, 100).unwrap();
        assert!(g.converged);
        assert!((g.error - oracle_error(&inst, &c.code, &g.theta)).abs() < 1e-12);
        for i in 0..inst.n {
            let mut th = g.theta.clone();
            th[i] ^= 1;
            assert!(oracle_error(&inst, &c.code, &th) <= g.error + 1e-15);
        }
    }
    assert!(greedy_jammer(&inst, &DeterministicCode { enc: vec![0; 4], dec: vec![0; 4] }, 3).is_err());
}

#[test]
fn greedy_jammer_dominates_the_iid_jammer() {
    let inst = lossy_instance();
    let spec = spec_for(&inst, 2.0, 21);
    let trials = 20_000;
    let greedy = random_code_transmit(&inst, &spec, &JammerStrategy::greedy(64), trials, 3, 0).unwrap();
    let iid = random_code_transmit(&inst, &spec, &JammerStrategy::iid(spec.q_star.clone()), trials, 3, 0).unwrap();
    assert!(greedy.estimate >= iid.estimate - 3.0 * iid.ci_half_width.max(greedy.ci_half_width));
    assert!(greedy.greedy.as_ref().unwrap().converged);
}

fn identity_family(size: usize) -> ChannelFamily {
    ChannelFamily::from_channels(&[avcgame::model::Channel::identity(size), avcgame::model::Channel::identity(size)]).unwrap()
}

#[test]
fn prefix_code_is_injective_and_decodes_noiselessly() {
    let fam = identity_family(2);
    let p = PrefixCode::min_distance(&fam, 3, 3, 1e8).unwrap();
    let mut enc = p.enc.clone();
    enc.sort();
    enc.dedup();
    assert_eq!(enc.len(), 3);
    for (i, &x) in p.enc.iter().enumerate() {
        assert_eq!(p.dec[x], i);
    }
    // first two words are at distance 3
    assert_eq!(p.enc[..2], [0, 7]);
    assert!(PrefixCode::min_distance(&fam, 9, 3, 1e8).is_err());
}

#[test]
fn noiseless_lossless_stochastic_code_never_errs() {
    let src = SourceSpec::hamming(Dist::uniform(2), 0.0);
    let inst = GameInstance::new(1, 1, identity_family(2), src).unwrap();
    let covering = DeterministicCode { enc: vec![0, 1], dec: vec![0, 1] };
    let flipped = DeterministicCode { enc: vec![1, 0], dec: vec![1, 0] };
    let ens = ReducedEnsemble::new(vec![covering, flipped]).unwrap();
    let prefix = PrefixCode::min_distance(&inst.family, 2, 1, 1e8).unwrap();
    for jam in [
        JammerStrategy::iid(Dist::uniform(2)),
        JammerStrategy::fixed(vec![1, 0]),
        JammerStrategy::greedy(8),
    ] {
        let r = stochastic_code_transmit(&inst, &ens, &prefix, &jam, 2000, 4, 0).unwrap();
        assert_eq!(r.errors, 0);
    }
}

/// Direct sum over the index, source sequence and both output blocks.
fn oracle_stochastic(inst: &GameInstance, ens: &ReducedEnsemble, p: &PrefixCode, theta: &[usize]) -> f64 {
    let fam = &inst.family;
    let (d, n, k) = (p.d_n, inst.n, inst.k);
    let src = &inst.source;
    let kk = ens.codes.len();
    let mut e = 0.0;
    for i in 0..kk {
        let xi = digits(p.enc[i], fam.x_size, d);
        for yp in 0..pow(fam.y_size, d) {
            let ypd = digits(yp, fam.y_size, d);
            let wp: f64 = (0..d).map(|l| fam.w(theta[l], xi[l], ypd[l])).product();
            let j = p.dec[yp];
            for s in 0..pow(src.size(), k) {
                let sd = digits(s, src.size(), k);
                let xd = digits(ens.codes[i].enc[s], fam.x_size, n);
                for y in 0..pow(fam.y_size, n) {
                    let yd = digits(y, fam.y_size, n);
                    let w: f64 = (0..n).map(|l| fam.w(theta[d + l], xd[l], yd[l])).product();
                    let sh = digits(ens.codes[j].dec[y], src.size(), k);
                    if distortion(src, &sd, &sh) > src.d_max + 1e-12 {
                        e += wp * w * iid(src.p_s.probs(), &sd) / kk as f64;
                    }
                }
            }
        }
    }
    e
}

#[test]
fn stochastic_code_exact_error_and_worst_state() {
    let inst = lossy_instance();
    let spec = spec_for(&inst, 2.0, 31);
    let ens = reduce_random_code(&inst, &spec, 3, 0, None).unwrap();
    let prefix = PrefixCode::min_distance(&inst.family, 3, 2, 1e8).unwrap();
    let t = avcgame::exactgame::GameTables::new(&inst).unwrap();
    let len = prefix.d_n + inst.n;
    let mut worst = (f64::NEG_INFINITY, vec![]);
    for th in 0..pow(2, len) {
        let td = digits(th, 2, len);
        let e = stochastic_code_error(&t, &inst.family, &ens, &prefix, &td);
        assert!((e - oracle_stochastic(&inst, &ens, &prefix, &td)).abs() < 1e-12);
        if e > worst.0 {
            worst = (e, td);
        }
    }
    let trials = 40_000;
    let fixed = stochastic_code_transmit(&inst, &ens, &prefix, &JammerStrategy::fixed(worst.1.clone()), trials, 8, 0).unwrap();
    assert!((fixed.estimate - worst.0).abs() <= 4.0 * (worst.0 * (1.0 - worst.0) / trials as f64).sqrt());
    let mixed = stochastic_code_transmit(&inst, &ens, &prefix, &JammerStrategy::iid(Dist::new(vec![0.5, 0.5]).unwrap()), trials, 8, 0).unwrap();
    assert!(fixed.estimate >= mixed.estimate - 3.0 * fixed.ci_half_width.max(mixed.ci_half_width));
    let greedy = stochastic_code_transmit(&inst, &ens, &prefix, &JammerStrategy::greedy(200), trials, 8, 0).unwrap();
    let g = greedy.greedy.unwrap();
    assert!(g.error <= worst.0 + 1e-15);
    assert!(greedy.estimate >= mixed.estimate - 3.0 * greedy.ci_half_width.max(mixed.ci_half_width));
}

#[test]
fn stochastic_code_stays_below_theorem8() {
    let src = SourceSpec::hamming(Dist::uniform(2), 0.0);
    let fam = ChannelFamily::bsc_family(&[0.02, 0.05]);
    let inst = GameInstance::new(1, 1, fam.clone(), src).unwrap();
    let jscc = Theorem7Inputs {
        q_star: Dist::point(2, 1),
        p_x: Dist::uniform(2),
        p_shat: Dist::uniform(2),
        gamma_grid: default_t7_gamma_grid(32),
        eval: Evaluation::Exact,
    };
    let inp = Theorem8Inputs {
        d_n: 2,
        k_codes: 2.0,
        p_x_index: Dist::uniform(2),
        typ_gamma: 0.5,
        jscc: jscc.clone(),
    };
    let params = BoundParams { eta: 0.2, ..BoundParams::default() };
    let bound = theorem8_bound(&inst, &params, &inp).unwrap();
    let spec = RandomCodeSpec {
        m: 2,
        p_shat: jscc.p_shat.clone(),
        p_x: jscc.p_x.clone(),
        gamma_l: bound.details["gamma"],
        q_star: jscc.q_star.clone(),
        seed: 17,
    };
    let ens = reduce_random_code(&inst, &spec, 2, 0, None).unwrap();
    let prefix = PrefixCode::min_distance(&fam, 2, 2, 1e8).unwrap();
    let r = stochastic_code_transmit(&inst, &ens, &prefix, &JammerStrategy::greedy(64), 20_000, 1, 0).unwrap();
    assert!(r.estimate <= bound.value + 3.0 * r.ci_half_width, "{} vs {}", r.estimate, bound.value);
}

#[test]
fn invalid_jammers_are_rejected() {
    let inst = lossy_instance();
    let c = sample_jscc_code(&inst, &spec_for(&inst, 2.0, 0)).unwrap();
    assert!(simulate_code(&inst, &c.code, &JammerStrategy::fixed(vec![0]), 10, 0, 0).is_err());
    assert!(simulate_code(&inst, &c.code, &JammerStrategy::fixed(vec![0, 2]), 10, 0, 0).is_err());
    assert!(simulate_code(&inst, &c.code, &JammerStrategy::iid(Dist::uniform(3)), 10, 0, 0).is_err());
    assert!(simulate_code(&inst, &c.code, &JammerStrategy::fixed(vec![0, 1]), 0, 0, 0).is_err());
}
