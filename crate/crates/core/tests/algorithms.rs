mod common;

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

use common::{bfs, fannkuch_oracle, pool, random_graph, two_pointer, Keyed};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splitkit::algorithms::{
    fannkuch, fannkuch_counted, filter_collect_even, max_sum_par, max_sum_seq,
    merge_slices_adaptive, merge_sort_iter, FannkuchPolicy, SortBuffers, SortVariant,
};
use splitkit::prelude::*;

fn sort_with<T: Ord + Copy + Send + Sync + Default>(data: &mut [T], variant: SortVariant) {
    let mut scratch = vec![T::default(); data.len()];
    merge_sort_iter(SortBuffers::new(data, &mut scratch).unwrap(), variant);
}

#[test]
fn sort_variants_match_std_sort() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for workers in [1, 2, 4] {
        let runtime = pool(workers);
        for len in [0usize, 1, 2, 5, 100, 4096, 50_000] {
            let original: Vec<i32> = (0..len).map(|_| rng.gen()).collect();
            let mut expected = original.clone();
            expected.sort();
            for variant in SortVariant::all() {
                let mut data = original.clone();
                runtime.run(|| sort_with(&mut data, variant));
                assert_eq!(data, expected, "{variant} on {workers} workers, len {len}");
            }
        }
    }
}

#[test]
fn sort_variants_are_stable() {
    let runtime = pool(4);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let original: Vec<Keyed> = (0..20_000)
        .map(|seq| Keyed {
            key: rng.gen_range(0..100),
            seq,
        })
        .collect();
    for variant in SortVariant::all() {
        let mut data = original.clone();
        runtime.run(|| sort_with(&mut data, variant));
        assert!(
            data.windows(2)
                .all(|w| (w[0].key, w[0].seq) < (w[1].key, w[1].seq)),
            "{variant} is not stable"
        );
    }
}

#[test]
fn sorted_input_is_unchanged() {
    let runtime = pool(4);
    let sorted: Vec<i32> = (0..10_000).collect();
    for variant in SortVariant::all() {
        let mut data = sorted.clone();
        runtime.run(|| sort_with(&mut data, variant));
        assert_eq!(data, sorted);
    }
}

#[test]
fn slice_merge_matches_two_pointer() {
    let runtime = pool(4);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut left: Vec<u32> = (0..1_000_000).map(|_| rng.gen_range(0..1000)).collect();
    let mut right: Vec<u32> = (0..1_000_000).map(|_| rng.gen_range(0..1000)).collect();
    left.sort();
    right.sort();
    let mut out = vec![0; 2_000_000];
    runtime.run(|| merge_slices_adaptive(&left, &right, &mut out));
    assert_eq!(out, two_pointer(&left, &right));
}

#[test]
fn merge_iterator_is_stable_in_parallel() {
    let runtime = pool(4);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut left: Vec<Keyed> = (0..30_000)
        .map(|seq| Keyed {
            key: rng.gen_range(0..50),
            seq,
        })
        .collect();
    let mut right: Vec<Keyed> = (0..20_000)
        .map(|seq| Keyed {
            key: rng.gen_range(0..50),
            seq: seq + 100_000,
        })
        .collect();
    left.sort();
    right.sort();
    let merged: Vec<Keyed> = runtime.run(|| left.par_iter().merge(&right).copied().collect());
    let expected = two_pointer(&left, &right);
    let as_pairs = |v: &[Keyed]| v.iter().map(|k| (k.key, k.seq)).collect::<Vec<_>>();
    assert_eq!(as_pairs(&merged), as_pairs(&expected));
}

#[test]
fn fannkuch_matches_sequential_enumeration() {
    assert_eq!(fannkuch_oracle(7), (228, 16));
    let policies = [
        FannkuchPolicy::StaticChunks { blocks: None },
        FannkuchPolicy::StaticChunks { blocks: Some(3) },
        FannkuchPolicy::ThiefSplitting,
        FannkuchPolicy::Adaptive,
    ];
    for workers in [1, 2, 4] {
        let runtime = pool(workers);
        for n in 1..=8 {
            let (checksum, max_flips) = fannkuch_oracle(n);
            for policy in policies {
                let got = runtime.run(|| fannkuch(n, policy)).unwrap();
                assert_eq!(
                    (got.checksum, got.max_flips, got.n),
                    (checksum, max_flips, n),
                    "{policy:?} n={n}"
                );
            }
        }
    }
}

#[test]
fn adaptive_fannkuch_builds_one_permutation_per_steal() {
    let runtime = pool(4);
    for _ in 0..10 {
        runtime.reset_stats();
        let (result, built) = runtime
            .run(|| fannkuch_counted(9, FannkuchPolicy::Adaptive))
            .unwrap();
        assert_eq!((result.checksum, result.max_flips), fannkuch_oracle(9));
        assert_eq!(built, runtime.stats().steals);
    }
}

#[test]
fn thief_fannkuch_rebuilds_only_after_divisions() {
    let runtime = pool(4);
    runtime.reset_stats();
    let (_, built) = runtime
        .run(|| fannkuch_counted(8, FannkuchPolicy::ThiefSplitting))
        .unwrap();
    let stats = runtime.stats();
    assert!(built <= stats.tasks - 1 + 1, "{built} built, {stats:?}");
}

#[test]
fn max_sum_matches_kadane() {
    let runtime = pool(4);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for len in [0usize, 1, 2, 10, 1000, 100_000] {
        let values: Vec<i64> = (0..len).map(|_| rng.gen_range(-100..100)).collect();
        assert_eq!(
            runtime.run(|| max_sum_par(&values)),
            max_sum_seq(&values),
            "len {len}"
        );
    }
    assert_eq!(
        runtime.run(|| max_sum_par(&[-2, 1, -3, 4, -1, 2, 1, -5, 4])),
        6
    );
}

#[test]
fn filter_even_matches_sequential_filter() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let values: Vec<i64> = (0..100_000).map(|_| rng.gen()).collect();
    let expected: Vec<i64> = values.iter().copied().filter(|x| x % 2 == 0).collect();
    for workers in [1, 2, 4] {
        let runtime = pool(workers);
        assert_eq!(runtime.run(|| filter_collect_even(&values)), expected);
    }
}

proptest! {
    #[test]
    fn all_is_not_find_first_of_negation(values in proptest::collection::vec(0u8..20, 0..300), bound in 0u8..21) {
        let all = values.par_iter().all(|x| **x < bound);
        let counter = values.par_iter().find_first(|x| **x >= bound);
        prop_assert_eq!(all, counter.is_none());
        prop_assert_eq!(counter, values.iter().find(|x| **x >= bound));
    }
}

struct Frontier<'g> {
    pending: Vec<usize>,
    graph: &'g [Vec<usize>],
    seen: &'g [AtomicBool],
    visits: &'g AtomicUsize,
}

impl Divisible for Frontier<'_> {
    fn base_length(&self) -> usize {
        self.pending.len()
    }

    fn divide_at(mut self, index: usize) -> (Self, Self) {
        let right = self.pending.split_off(index.min(self.pending.len()));
        let other = Frontier {
            pending: right,
            graph: self.graph,
            seen: self.seen,
            visits: self.visits,
        };
        (self, other)
    }
}

#[test]
fn work_traverses_each_node_once() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for workers in [1, 4] {
        let runtime = pool(workers);
        for _ in 0..5 {
            let graph = random_graph(&mut rng, 1000, 3000);
            let seen: Vec<AtomicBool> = (0..1000).map(|_| AtomicBool::new(false)).collect();
            let visits = AtomicUsize::new(0);
            seen[0].store(true, Ordering::Relaxed);
            let root = Frontier {
                pending: vec![0],
                graph: &graph,
                seen: &seen,
                visits: &visits,
            };
            runtime.run(|| {
                work(root, |state: &mut Frontier<'_>, budget| {
                    for _ in 0..budget {
                        let Some(node) = state.pending.pop() else {
                            break;
                        };
                        state.visits.fetch_add(1, Ordering::Relaxed);
                        for &next in &state.graph[node] {
                            if !state.seen[next].swap(true, Ordering::Relaxed) {
                                state.pending.push(next);
                            }
                        }
                    }
                })
                .for_each(|_| ())
            });
            let expected = bfs(&graph, 0);
            let got: Vec<bool> = seen.iter().map(|s| s.load(Ordering::Relaxed)).collect();
            assert_eq!(got, expected);
            assert_eq!(
                visits.load(Ordering::Relaxed),
                expected.iter().filter(|s| **s).count()
            );
        }
    }
}

#[test]
fn zip_rejects_mismatched_lengths() {
    let a = [1, 2, 3];
    let b = [4, 5];
    let err = a.par_iter().zip(b.par_iter()).err().unwrap();
    assert_eq!((err.left, err.right), (3, 2));
    let sums: Vec<i32> = a
        .par_iter()
        .zip(a.par_iter())
        .unwrap()
        .map(|(x, y)| x + y)
        .collect();
    assert_eq!(sums, vec![2, 4, 6]);
}
