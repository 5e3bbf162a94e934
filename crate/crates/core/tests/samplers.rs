mod common;

use std::collections::HashMap;

use common::*;
use num_bigint::BigUint;
use num_traits::One;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use relshap::game::{exact_shapley, EvaluatorKind, GameContext};
use relshap::harness::mean_se;
use relshap::provenance::{EndogenousClass, EndogenousPartition};
use relshap::relcore::TupleId;
use relshap::samplers::*;
use relshap::Error;

fn example_ctx() -> GameContext {
    let (db, q) = example1();
    GameContext::new(db, &q, EvaluatorKind::Compiled).unwrap()
}

fn synthetic_partition(sizes: &[usize]) -> EndogenousPartition {
    let mut next = 0u32;
    EndogenousPartition {
        classes: sizes
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                let ids = (next..next + k as u32).map(TupleId).collect();
                next += k as u32;
                EndogenousClass { relation: i, name: format!("r{i}"), ids }
            })
            .collect(),
    }
}

#[test]
fn stratum_draws_are_uniform() {
    // t = o1, v = (2 lineitems, 1 customer, 0 orders): C(4,2) = 6 equally likely coalitions.
    let ctx = example_ctx();
    let v = RelationVector(vec![2, 1, 0]);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut seen: HashMap<Vec<TupleId>, u64> = HashMap::new();
    let draws = 6000;
    for _ in 0..draws {
        let s = sample_coalition(&v, ctx.partition(), O1, &mut rng).unwrap();
        let ids = ctx.ids_of(&s);
        assert!(ids.contains(&C1) && !ids.contains(&O1));
        *seen.entry(ids).or_default() += 1;
    }
    assert_eq!(seen.len(), 6);
    let expected = draws as f64 / 6.0;
    let chi2: f64 = seen.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // df = 5, p = 0.001
    assert!(chi2 < 20.515, "chi-square {chi2}");
}

#[test]
fn out_of_range_vector_is_rejected() {
    let ctx = example_ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let v = RelationVector(vec![5, 0, 0]);
    assert!(matches!(sample_coalition(&v, ctx.partition(), O1, &mut rng), Err(Error::Domain(_))));
}

#[test]
fn example_strata() {
    let ctx = example_ctx();
    let strata = enumerate_strata(ctx.partition(), O1).unwrap();
    assert_eq!(strata.len(), 10);
    let bounds = reduced_bounds(ctx.partition(), O1).unwrap();
    assert_eq!(bounds, vec![4, 1, 0]);
    let total: BigUint = strata.iter().map(|v| stratum_card(v, &bounds)).sum();
    assert_eq!(total, BigUint::from(32u32));
    let pi: f64 = strata.iter().map(|v| stratum_prob(v, &bounds, 6)).sum();
    assert!((pi - 1.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weight_identities(sizes in proptest::collection::vec(1usize..7, 1..5), pick in any::<prop::sample::Index>()) {
        let part = synthetic_partition(&sizes);
        let n: usize = sizes.iter().sum();
        let t = TupleId(pick.index(n) as u32);
        let bounds = reduced_bounds(&part, t).unwrap();
        let strata = enumerate_strata(&part, t).unwrap();
        let total: BigUint = strata.iter().map(|v| stratum_card(v, &bounds)).sum();
        prop_assert_eq!(total, BigUint::one() << (n - 1));
        let pi: f64 = strata.iter().map(|v| stratum_prob(v, &bounds, n)).sum();
        prop_assert!((pi - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn allocations_sum_to_budget(
        weights in proptest::collection::vec(proptest::option::of(0.0f64..1e6), 1..40),
        budget in 0u64..5000,
        floor in 0u64..5,
    ) {
        let a = floor_weighted(&weights, budget, floor);
        let eligible = weights.iter().filter(|w| w.is_some()).count();
        if eligible > 0 {
            prop_assert_eq!(a.total(), budget);
        }
        for (w, &c) in weights.iter().zip(&a.counts) {
            if w.is_none() {
                prop_assert_eq!(c, 0);
            } else {
                prop_assert!(c >= a.floor);
            }
        }
    }

    #[test]
    fn welford_merge_matches_single_pass(xs in proptest::collection::vec(-1e4f64..1e4, 2..200), cut in any::<prop::sample::Index>()) {
        let k = cut.index(xs.len());
        let mut all = Welford::default();
        let mut a = Welford::default();
        let mut b = Welford::default();
        xs.iter().for_each(|&x| all.push(x));
        xs[..k].iter().for_each(|&x| a.push(x));
        xs[k..].iter().for_each(|&x| b.push(x));
        let m = a.merge(&b);
        prop_assert_eq!(m.count, all.count);
        prop_assert!((m.mean - all.mean).abs() <= 1e-9 * all.mean.abs().max(1.0));
        prop_assert!((m.m2 - all.m2).abs() <= 1e-9 * all.m2.abs().max(1.0));
        let r = b.merge(&a);
        prop_assert!((r.mean - m.mean).abs() <= 1e-12 * m.mean.abs().max(1.0));
    }
}

#[test]
fn merge_rejects_mismatched_strata() {
    let a = StratumStats::new(StratumKey::Size(1), 0.25, BigUint::from(3u32), false);
    let b = StratumStats::new(StratumKey::Size(2), 0.25, BigUint::from(3u32), false);
    assert!(merge_stats(&a, &b).is_err());
    let merged = merge_stats(&a, &a).unwrap();
    assert_eq!(merged.count, 0);
}

#[test]
fn reports_conserve_the_budget() {
    let ctx = example_ctx();
    for m in Method::ALL {
        for budget in [1, 5, 37, 200] {
            let r = run_estimate(&ctx, O1, &EstimatorConfig::new(m, budget, 9)).unwrap();
            assert_eq!(r.samples_used, budget, "{m} m={budget}");
            for cycle in &r.allocations {
                assert!(cycle.len() == r.strata.len());
            }
            let total: u64 = r.allocations.iter().flatten().sum();
            assert_eq!(total, budget);
        }
    }
}

#[test]
fn pruned_strata_get_no_samples() {
    let ctx = example_ctx();
    for m in [Method::Rss, Method::Arss] {
        let r = run_estimate(&ctx, O1, &EstimatorConfig::new(m, 300, 1)).unwrap();
        // every vector without a lineitem or without the customer
        assert_eq!(r.strata.iter().filter(|s| s.pruned).count(), 6);
        for cycle in &r.allocations {
            for (s, &c) in r.strata.iter().zip(cycle) {
                if s.pruned {
                    assert_eq!(c, 0);
                }
            }
        }
    }
}

#[test]
fn every_size_stratum_is_visited() {
    let ctx = example_ctx();
    let r = run_ss(&ctx, O1, &EstimatorConfig::new(Method::Ss, 6, 3)).unwrap();
    assert!(r.strata.iter().all(|s| s.count >= 1));
}

#[test]
fn reductions_with_one_cycle() {
    let ctx = example_ctx();
    for (adaptive, plain) in [(Method::Ass, Method::Ss), (Method::Arss, Method::Rss)] {
        for seed in [0, 7, 1234] {
            let mut a = EstimatorConfig::new(adaptive, 250, seed);
            a.cycles = 1;
            let b = EstimatorConfig::new(plain, 250, seed);
            let ra = run_estimate(&ctx, O1, &a).unwrap();
            let rb = run_estimate(&ctx, O1, &b).unwrap();
            assert!(ra.same_outcome(&rb), "{adaptive} vs {plain}, seed {seed}");
        }
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let (db, q) = star(1, 24, 2, 2, 2.0);
    let ctx = GameContext::new(db, &q, EvaluatorKind::Compiled).unwrap();
    let t = ctx.players()[ctx.n() - 1];
    for m in Method::ALL {
        let mut cfg = EstimatorConfig::new(m, 3000, 17);
        let base = run_estimate(&ctx, t, &cfg).unwrap();
        for w in [2, 4, 7] {
            cfg.workers = w;
            let other = run_estimate(&ctx, t, &cfg).unwrap();
            assert!(base.same_outcome(&other), "{m} with {w} workers");
        }
    }
}

#[test]
fn seeds_matter() {
    let ctx = example_ctx();
    let a = run_estimate(&ctx, O1, &EstimatorConfig::new(Method::Mcs, 100, 1)).unwrap();
    let b = run_estimate(&ctx, O1, &EstimatorConfig::new(Method::Mcs, 100, 2)).unwrap();
    assert_ne!(a.value, b.value);
}

#[test]
fn method_specific_entry_points_check_the_config() {
    let ctx = example_ctx();
    let cfg = EstimatorConfig::new(Method::Ss, 10, 0);
    assert!(run_ss(&ctx, O1, &cfg).is_ok());
    assert!(matches!(run_rss(&ctx, O1, &cfg), Err(Error::Config(_))));
    assert!(run_mcs(&ctx, O1, &EstimatorConfig::new(Method::Mcs, 10, 0)).is_ok());
    assert!(run_ass(&ctx, O1, &EstimatorConfig::new(Method::Ass, 10, 0)).is_ok());
    assert!(run_arss(&ctx, O1, &EstimatorConfig::new(Method::Arss, 10, 0)).is_ok());
}

#[test]
fn invalid_configs_and_targets() {
    let ctx = example_ctx();
    assert!(matches!(
        run_estimate(&ctx, O1, &EstimatorConfig::new(Method::Rss, 0, 0)),
        Err(Error::Config(_))
    ));
    let mut cfg = EstimatorConfig::new(Method::Arss, 10, 0);
    cfg.cycles = 0;
    assert!(run_estimate(&ctx, O1, &cfg).is_err());
    let r = run_estimate(&ctx, TupleId(6), &EstimatorConfig::new(Method::Arss, 10, 0)).unwrap();
    assert!(r.null_player);
    assert_eq!(r.value, 0.0);
    assert!(matches!(
        run_estimate(&ctx, TupleId(77), &EstimatorConfig::new(Method::Arss, 10, 0)),
        Err(Error::Domain(_))
    ));
}

#[test]
fn a_tiny_budget_warns_instead_of_failing() {
    let ctx = example_ctx();
    let r = run_estimate(&ctx, O1, &EstimatorConfig::new(Method::Rss, 2, 0)).unwrap();
    assert_eq!(r.samples_used, 2);
    assert!(!r.warnings.is_empty());
}

fn unbiased(ctx: &GameContext, t: TupleId, exact: f64, make: impl Fn(u64) -> EstimatorConfig) {
    let est: Vec<f64> = (0..200).map(|s| run_estimate(ctx, t, &make(s)).unwrap().value).collect();
    let (mean, se) = mean_se(&est);
    assert!((mean - exact).abs() <= 3.0 * se + 1e-9, "mean {mean} exact {exact} se {se}");
}

#[test]
fn binned_strata_stay_unbiased() {
    let (db, q) = star(1, 24, 2, 2, 2.0);
    let ctx = GameContext::new(db, &q, EvaluatorKind::Compiled).unwrap();
    let t = ctx.players()[0];
    let exact = exact_shapley(&ctx, t).unwrap();
    for m in [Method::Rss, Method::Arss] {
        unbiased(&ctx, t, exact, |s| {
            let mut c = EstimatorConfig::new(m, 200, s);
            c.bins = Some(3);
            c
        });
    }
}

#[test]
fn unpruned_runs_stay_unbiased() {
    let ctx = example_ctx();
    unbiased(&ctx, O1, 2319.5 / 3.0, |s| {
        let mut c = EstimatorConfig::new(Method::Arss, 200, s);
        c.prune = false;
        c
    });
}

#[test]
fn dedup_enumerates_small_strata() {
    let ctx = example_ctx();
    let mut cfg = EstimatorConfig::new(Method::Rss, 100, 5);
    cfg.dedup = true;
    let r = run_estimate(&ctx, O1, &cfg).unwrap();
    assert!((r.value - 2319.5 / 3.0).abs() < 1e-9);
    assert!(r.strata.iter().filter(|s| !s.pruned).all(|s| s.exhausted));
    cfg.method = Method::Ss;
    let r = run_estimate(&ctx, O1, &cfg).unwrap();
    assert!((r.value - 2319.5 / 3.0).abs() < 1e-9);
}

#[test]
fn plain_monte_carlo_handles_large_games() {
    let mut spec = relshap::harness::GenSpec::new(
        3,
        relshap::harness::Scale { fact: 300, orders: 20, customers: 1 },
        1.0,
    );
    spec.focus = false;
    let g = relshap::harness::gen_instance(&spec).unwrap();
    let (db, q) = load(&g);
    let ctx = GameContext::new(db, &q, EvaluatorKind::Compiled).unwrap();
    assert!(ctx.n() > 100);
    let t = ctx.players()[0];
    for m in Method::ALL {
        let r = run_estimate(&ctx, t, &EstimatorConfig::new(m, 400, 1)).unwrap();
        assert!(r.value.is_finite(), "{m}");
    }
}
