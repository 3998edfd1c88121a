mod common;

use avcgame::exactgame::lower_value_exact;
use avcgame::lprelax::*;
use avcgame::model::{Channel, ChannelFamily, Dist, GameInstance, SourceSpec};
use avcgame::singleletter::ratedist::DEFAULT_TOL;
use avcgame::singleletter::rate_distortion;
use common::{bsc_jam, corpus, random_dist};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn relaxation_chain_on_corpus() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (i, inst) in corpus(202, 40, 10).iter().enumerate() {
        let q = random_dist(&mut rng, inst.t_space().size());
        let sc = solve_sc(inst, &q).unwrap();
        let lp = solve_lp(inst, &q).unwrap();
        assert!((lp.value - lp.dual_value).abs() <= 1e-7, "instance {i}: {} vs {}", lp.value, lp.dual_value);
        assert!(lp.dual_residual.max() <= 1e-7, "instance {i}: {:?}", lp.dual_residual);
        assert!(lp.value <= sc.value + 1e-7, "instance {i}: {} > {}", lp.value, sc.value);
        assert!(lp.value >= -1e-9);
    }
}

#[test]
fn explicit_dual_point_is_feasible_and_bounds_chain() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let insts = corpus(303, 80, 20);
    for (i, inst) in insts.iter().enumerate() {
        let rd = rate_distortion(&inst.source, DEFAULT_TOL).unwrap();
        let q = random_dist(&mut rng, inst.t_space().size());
        let kind = if rng.random_bool(0.5) { PartitionKind::Types } else { PartitionKind::Single };
        let aux = if rng.random_bool(0.7) { AuxLaw::TypeIid } else { AuxLaw::Uniform };
        let part = partition(inst, kind).unwrap();
        let p_ybar = aux_output_law(inst, &q, &part, &aux).unwrap();
        let gamma = 10f64.powf(rng.random_range(-3.0..1.0));
        let dp = build_theorem4_dual(inst, &q, &rd, gamma, &part, &p_ybar).unwrap();
        assert!(dp.residual.max() <= 1e-9, "draw {i}: {:?}", dp.residual);
        let b = theorem4_bound(inst, &q, &rd, &part, &p_ybar, &[gamma], Evaluation::Exact).unwrap();
        assert!(b.raw <= dp.dual_cost + 1e-7, "draw {i}");
        let lp = solve_lp(inst, &q).unwrap();
        assert!(dp.dual_cost <= lp.dual_value + 1e-7, "draw {i}");
        let sc = solve_sc(inst, &q).unwrap();
        assert!(b.raw <= sc.value + 1e-7, "draw {i}");
    }
}

#[test]
fn gamma_limits() {
    let inst = bsc_jam(0.0);
    let rd = rate_distortion(&inst.source, DEFAULT_TOL).unwrap();
    let q = [0.5, 0.5];
    let part = partition(&inst, PartitionKind::Types).unwrap();
    let p_ybar = aux_output_law(&inst, &q, &part, &AuxLaw::TypeIid).unwrap();
    let big = build_theorem4_dual(&inst, &q, &rd, 60.0, &part, &p_ybar).unwrap();
    assert!(big.vars.gam_c.iter().all(|v| v.abs() < 1e-25));
    // γ → 0: the penalty is about U = 2 cells, so the bound is at most 1 - U < 0
    let tiny = theorem4_bound(&inst, &q, &rd, &part, &p_ybar, &[1e-9], Evaluation::Exact).unwrap();
    assert!(tiny.raw <= 1.0 - part.len() as f64 + 1e-6);
    assert_eq!(tiny.value, 0.0);
}

#[test]
fn noiseless_lossless_bound_tends_to_zero_from_below() {
    let inst = GameInstance::new(
        1,
        1,
        ChannelFamily::from_channels(&[Channel::identity(2)]).unwrap(),
        SourceSpec::hamming(Dist::uniform(2), 0.0),
    )
    .unwrap();
    let rd = rate_distortion(&inst.source, DEFAULT_TOL).unwrap();
    let part = partition(&inst, PartitionKind::Types).unwrap();
    let q = [1.0];
    let p_ybar = aux_output_law(&inst, &q, &part, &AuxLaw::TypeIid).unwrap();
    let mut prev = f64::NEG_INFINITY;
    for g in [1.0, 2.0, 5.0, 10.0, 20.0] {
        let b = theorem4_bound(&inst, &q, &rd, &part, &p_ybar, &[g], Evaluation::Exact).unwrap();
        assert!(b.raw <= 1e-15);
        assert!(b.raw >= prev - 1e-15);
        prev = b.raw;
    }
    assert!(prev > -1e-8);
    assert_eq!(solve_sc(&inst, &q).unwrap().value, 0.0);
}

#[test]
fn maximin_bound_is_below_lower_value() {
    for inst in corpus(404, 25, 5) {
        let rd = rate_distortion(&inst.source, DEFAULT_TOL).unwrap();
        let grid = default_q_grid(&inst, 30);
        let gammas = default_gamma_grid(&inst, 32);
        let b = maximin_lp_bound(&inst, &rd, &grid, &gammas, PartitionKind::Types, &AuxLaw::TypeIid).unwrap();
        let lo = lower_value_exact(&inst).unwrap();
        assert!(b.raw <= lo.value + 1e-7);
        assert!(b.value <= lo.value + 1e-7);
    }
}

#[test]
fn state_relabelling_leaves_the_bound_unchanged() {
    let fam = ChannelFamily::bsc_family(&[0.1, 0.25]);
    let swapped = ChannelFamily::bsc_family(&[0.25, 0.1]);
    let src = SourceSpec::hamming(Dist::new(vec![0.6, 0.4]).unwrap(), 0.0);
    let a = GameInstance::new(1, 1, fam, src.clone()).unwrap();
    let b = GameInstance::new(1, 1, swapped, src).unwrap();
    let rd = rate_distortion(&a.source, DEFAULT_TOL).unwrap();
    let grid = default_q_grid(&a, 20);
    let gammas = default_gamma_grid(&a, 32);
    let ra = maximin_lp_bound(&a, &rd, &grid, &gammas, PartitionKind::Types, &AuxLaw::TypeIid).unwrap();
    let rb = maximin_lp_bound(&b, &rd, &grid, &gammas, PartitionKind::Types, &AuxLaw::TypeIid).unwrap();
    assert!((ra.raw - rb.raw).abs() < 1e-12);
}

#[test]
fn monte_carlo_mode_brackets_exact() {
    let inst = GameInstance::new(1, 2, ChannelFamily::bsc_family(&[0.1, 0.2]), SourceSpec::hamming(Dist::uniform(2), 0.0)).unwrap();
    let rd = rate_distortion(&inst.source, DEFAULT_TOL).unwrap();
    let q = vec![0.25; 4];
    let part = partition(&inst, PartitionKind::Types).unwrap();
    let p_ybar = aux_output_law(&inst, &q, &part, &AuxLaw::TypeIid).unwrap();
    let g = [1.5];
    let ex = theorem4_bound(&inst, &q, &rd, &part, &p_ybar, &g, Evaluation::Exact).unwrap();
    let mc = theorem4_bound(&inst, &q, &rd, &part, &p_ybar, &g, Evaluation::MonteCarlo { trials: 200_000, seed: 9 }).unwrap();
    let ci = mc.ci.unwrap();
    assert!(ci > 0.0);
    // the min over inputs biases the estimate down slightly, so allow a wider band
    assert!((mc.raw - ex.raw).abs() <= 3.0 * ci, "{} vs {} (ci {ci})", mc.raw, ex.raw);
}

#[test]
fn single_state_family_reduces_to_plain_converse() {
    let inst = GameInstance::new(1, 1, ChannelFamily::bsc_family(&[0.1]), SourceSpec::hamming(Dist::uniform(2), 0.0)).unwrap();
    let rd = rate_distortion(&inst.source, DEFAULT_TOL).unwrap();
    let grid = default_q_grid(&inst, 10);
    assert_eq!(grid, vec![vec![1.0]]);
    let b = maximin_lp_bound(&inst, &rd, &grid, &default_gamma_grid(&inst, 32), PartitionKind::Types, &AuxLaw::TypeIid).unwrap();
    let lo = lower_value_exact(&inst).unwrap();
    assert!(b.raw <= lo.value + 1e-12);
}
