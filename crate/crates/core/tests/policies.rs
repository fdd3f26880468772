mod common;

use std::sync::atomic::{AtomicUsize, Ordering};

use common::{leaves, oracle_leaves, partitions, pool, shape, Tracked};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use splitkit::policy::{default_thief_counter, CapGauge, PolicyKind};
use splitkit::prelude::*;

fn runner() -> TestRunner {
    TestRunner::new(Config {
        failure_persistence: None,
        ..Config::with_cases(1000)
    })
}

#[test]
fn bound_depth_matches_oracle() {
    let runtime = pool(1);
    runner()
        .run(&(0usize..5000, 0usize..12), |(n, d)| {
            let got = runtime.run(|| leaves(Tracked::new(n), &[PolicyKind::BoundDepth(d)]));
            let want = oracle_leaves(n, &|len, depth, _| depth < d && len > 1);
            prop_assert_eq!(shape(&got), want);
            prop_assert!(got.iter().all(|t| t.depth <= d));
            Ok(())
        })
        .unwrap();
}

#[test]
fn bound_depth_three_gives_eight_leaves() {
    let got = leaves(Tracked::new(1000), &[PolicyKind::BoundDepth(3)]);
    assert_eq!(got.len(), 8);
    assert!(partitions(&got, 1000));
}

#[test]
fn even_levels_leaves_are_even() {
    let runtime = pool(1);
    runner()
        .run(&(0usize..3000, 0usize..9), |(n, d)| {
            let kinds = [PolicyKind::BoundDepth(d), PolicyKind::EvenLevels];
            let got = runtime.run(|| leaves(Tracked::new(n), &kinds));
            prop_assert!(got.iter().all(|t| t.depth % 2 == 0), "{:?}", shape(&got));
            prop_assert!(partitions(&got, n));
            let want = oracle_leaves(n, &|len, depth, _| depth % 2 == 1 || (depth < d && len > 1));
            prop_assert_eq!(shape(&got), want);
            Ok(())
        })
        .unwrap();
}

#[test]
fn force_depth_divides_rigid_sources() {
    let got = leaves(Tracked::rigid(10), &[PolicyKind::ForceDepth(2)]);
    assert_eq!(got.len(), 4);
    assert!(got.iter().all(|t| t.depth == 2));
    let runtime = pool(1);
    runner()
        .run(&(0usize..2000, 0usize..8), |(n, d)| {
            let got = runtime.run(|| leaves(Tracked::rigid(n), &[PolicyKind::ForceDepth(d)]));
            prop_assert_eq!(got.len(), 1 << d);
            prop_assert!(got.iter().all(|t| t.depth == d));
            prop_assert!(partitions(&got, n));
            Ok(())
        })
        .unwrap();
}

#[test]
fn size_limit_bounds_leaves() {
    let got = leaves(Tracked::new(100), &[PolicyKind::SizeLimit(25)]);
    assert_eq!(
        got.iter().map(|t| t.range.len()).collect::<Vec<_>>(),
        vec![25; 4]
    );
    let runtime = pool(1);
    runner()
        .run(&(0usize..5000, 1usize..300), |(n, t)| {
            let got = runtime.run(|| leaves(Tracked::new(n), &[PolicyKind::SizeLimit(t)]));
            prop_assert!(got.iter().all(|leaf| leaf.range.len() <= t));
            let want = oracle_leaves(n, &|len, _, _| len > t && len > 1);
            prop_assert_eq!(shape(&got), want);
            Ok(())
        })
        .unwrap();
}

#[test]
fn cap_bounds_concurrent_tasks() {
    let runtime = pool(4);
    runner()
        .run(&(0usize..4000, 1usize..9), |(n, k)| {
            let gauge = CapGauge::new(k);
            let active = AtomicUsize::new(0);
            let peak = AtomicUsize::new(0);
            let got: Vec<Tracked> = runtime.run(|| {
                wrap_iter(Tracked::new(n))
                    .cap_gauged(gauge.clone())
                    .map(|leaf| {
                        let now = active.fetch_add(1, Ordering::SeqCst) + 1;
                        peak.fetch_max(now, Ordering::SeqCst);
                        std::hint::spin_loop();
                        active.fetch_sub(1, Ordering::SeqCst);
                        leaf
                    })
                    .collect()
            });
            prop_assert!(
                gauge.high_water() <= k,
                "high water {} > {}",
                gauge.high_water(),
                k
            );
            prop_assert!(peak.load(Ordering::SeqCst) <= k);
            prop_assert_eq!(gauge.active(), 0);
            prop_assert!(partitions(&got, n));
            Ok(())
        })
        .unwrap();
}

#[test]
fn join_context_builds_a_left_comb_on_one_worker() {
    let runtime = pool(1);
    let got = runtime.run(|| leaves(Tracked::new(1024), &[PolicyKind::JoinContext(3)]));
    let sizes: Vec<usize> = got.iter().map(|t| t.range.len()).collect();
    assert_eq!(sizes, vec![128, 128, 256, 512]);
    runner()
        .run(&(0usize..5000, 0usize..10), |(n, d)| {
            let got = runtime.run(|| leaves(Tracked::new(n), &[PolicyKind::JoinContext(d)]));
            let want = oracle_leaves(n, &|len, depth, right| !right && depth < d && len > 1);
            prop_assert_eq!(shape(&got), want);
            Ok(())
        })
        .unwrap();
}

#[test]
fn join_context_leaves_partition_on_many_workers() {
    let runtime = pool(4);
    runner()
        .run(&(0usize..5000, 0usize..10), |(n, d)| {
            let got = runtime.run(|| leaves(Tracked::new(n), &[PolicyKind::JoinContext(d)]));
            prop_assert!(partitions(&got, n));
            prop_assert!(got.iter().all(|t| t.depth <= d));
            Ok(())
        })
        .unwrap();
}

#[test]
fn thief_splitting_on_one_worker_is_a_full_tree() {
    let runtime = pool(1);
    for c in 0..8 {
        let got = runtime.run(|| {
            leaves(
                Tracked::new(1 << 12),
                &[PolicyKind::ThiefSplitting(Some(c))],
            )
        });
        assert_eq!(got.len(), 1 << c, "counter {c}");
        assert!(got.iter().all(|t| t.depth == c));
    }
    let got = runtime.run(|| leaves(Tracked::new(1 << 12), &[PolicyKind::ThiefSplitting(None)]));
    assert_eq!(got.len(), 1 << default_thief_counter(1));
}

#[test]
fn thief_splitting_leaves_partition_on_many_workers() {
    let runtime = pool(4);
    runner()
        .run(
            &(0usize..20_000, proptest::option::of(0usize..6)),
            |(n, c)| {
                let got = runtime.run(|| leaves(Tracked::new(n), &[PolicyKind::ThiefSplitting(c)]));
                prop_assert!(partitions(&got, n));
                Ok(())
            },
        )
        .unwrap();
}

#[test]
fn stacked_policies_compose() {
    let kinds =
        splitkit::policy::parse_policies("size_limit=10+bound_depth=5+even_levels").unwrap();
    let runtime = pool(1);
    runner()
        .run(&(0usize..3000), |n| {
            let got = runtime.run(|| leaves(Tracked::new(n), &kinds));
            let want = oracle_leaves(n, &|len, depth, _| {
                depth % 2 == 1 || (depth < 5 && len > 10 && len > 1)
            });
            prop_assert_eq!(shape(&got), want);
            Ok(())
        })
        .unwrap();
}
