mod common;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use common::pool;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splitkit::algorithms::find_first_counted;
use splitkit::prelude::*;
use splitkit::runtime;
use splitkit::{Schedule, Scheduler};

fn schedules() -> Vec<Schedule> {
    let adaptive = Scheduler::Adaptive(AdaptiveConfig::default());
    let mut all = Vec::new();
    for scheduler in [Scheduler::Join, Scheduler::DepJoin, adaptive] {
        all.push(Schedule {
            scheduler,
            blocks: None,
        });
        all.push(Schedule {
            scheduler,
            blocks: Some(BlockSchedule::new(3, 2.0)),
        });
    }
    all
}

fn busy(x: u64) -> u64 {
    (0..20).fold(x, |acc, i| {
        acc.wrapping_mul(6364136223846793005).wrapping_add(i)
    })
}

#[test]
fn every_schedule_gives_the_same_sums() {
    for workers in [1, 2, 4] {
        let runtime = pool(workers);
        for schedule in schedules() {
            for n in [0u64, 1, 2, 10, 1000, 100_000] {
                let got: u64 = runtime.run(|| {
                    (0..n)
                        .into_par_iter()
                        .map(|x| x * 3)
                        .with_schedule(schedule)
                        .sum()
                });
                assert_eq!(
                    got,
                    3 * n * n.saturating_sub(1) / 2,
                    "{schedule:?} on {workers} workers, n={n}"
                );
                let evens: Vec<u64> = runtime.run(|| {
                    (0..n)
                        .into_par_iter()
                        .filter(|x| x % 2 == 0)
                        .with_schedule(schedule)
                        .collect()
                });
                assert_eq!(evens, (0..n).filter(|x| x % 2 == 0).collect::<Vec<_>>());
            }
        }
    }
}

#[test]
fn adaptive_tasks_are_steals_plus_one() {
    for workers in [1, 2, 4] {
        let runtime = pool(workers);
        for round in 0..20 {
            runtime.reset_stats();
            let n: u64 = 1 << (10 + round % 8);
            let got: u64 = runtime.run(|| {
                (0..n)
                    .into_par_iter()
                    .map(busy)
                    .adaptive()
                    .reduce(|| 0, u64::wrapping_add)
            });
            let want = (0..n).map(busy).fold(0, u64::wrapping_add);
            assert_eq!(got, want);
            let stats = runtime.stats();
            assert_eq!(
                stats.tasks,
                stats.steals + 1,
                "{stats:?} on {workers} workers"
            );
        }
    }
}

#[test]
fn adaptive_micro_loops_are_logarithmic_on_one_worker() {
    let runtime = pool(1);
    for n in [1u64, 2, 3, 100, 1000, 1 << 16, 1_000_000] {
        runtime.reset_stats();
        let got: u64 = runtime.run(|| (0..n).into_par_iter().adaptive().sum());
        assert_eq!(got, n * (n - 1) / 2);
        let bound = (n as f64).log2().ceil() as u64 + 1;
        let loops = runtime.stats().micro_loops;
        assert!(loops <= bound, "n={n}: {loops} micro-loops > {bound}");
    }
}

#[test]
fn adaptive_divides_when_workers_are_idle() {
    let runtime = pool(4);
    let workers_seen = Mutex::new(std::collections::BTreeSet::new());
    runtime.run(|| {
        (0..400u64).into_par_iter().adaptive().for_each(|_| {
            workers_seen
                .lock()
                .unwrap()
                .insert(runtime::current_worker_index());
            std::thread::sleep(Duration::from_micros(200));
        })
    });
    assert!(runtime.stats().steals > 0);
    assert!(workers_seen.lock().unwrap().len() > 1);
}

#[test]
fn depjoin_combines_on_the_last_finisher() {
    let runtime = pool(2);
    let leaf_workers = Mutex::new(Vec::new());
    let combine_worker = Mutex::new(None);
    runtime.run(|| {
        wrap_iter(0..2usize)
            .force_depth(1)
            .map(|r| {
                if r.start == 1 {
                    std::thread::sleep(Duration::from_millis(50));
                }
                leaf_workers
                    .lock()
                    .unwrap()
                    .push((r.start, runtime::current_worker_index()));
                r
            })
            .depjoin()
            .reduce_with(|a, b| {
                *combine_worker.lock().unwrap() = Some(runtime::current_worker_index());
                a.start..b.end
            })
    });
    let leaves = leaf_workers.into_inner().unwrap();
    let right = leaves.iter().find(|(start, _)| *start == 1).unwrap().1;
    assert_eq!(combine_worker.into_inner().unwrap(), Some(right));
}

#[test]
fn blocks_bound_wasted_work() {
    let n = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for workers in [1, 4] {
        let runtime = pool(workers);
        let mut targets = vec![0, n / 2 - 1, n - 1];
        targets.extend((0..10).map(|_| rng.gen_range(0..n)));
        for target in targets {
            let mut values = vec![0u32; n];
            values[target] = 1;
            for initial in [1usize, 4, 16] {
                let schedule = Schedule {
                    scheduler: Scheduler::Join,
                    blocks: Some(BlockSchedule::new(initial, 2.0)),
                };
                let kinds = [splitkit::PolicyKind::ThiefSplitting(None)];
                let found =
                    runtime.run(|| find_first_counted(&values, |x| *x == 1, &kinds, schedule));
                assert_eq!(found.value, Some(target));
                let bound = 2 * (target + 1) + 2 * initial;
                assert!(
                    found.consumed <= bound,
                    "target {target}: consumed {} > {bound}",
                    found.consumed
                );
            }
        }
    }
}

#[test]
fn blocks_stop_after_the_answer() {
    let runtime = pool(2);
    let visited = AtomicUsize::new(0);
    let found = runtime.run(|| {
        (0..1_000_000usize)
            .into_par_iter()
            .map(|x| {
                visited.fetch_add(1, Ordering::Relaxed);
                x
            })
            .by_blocks(BlockSchedule::new(2, 2.0))
            .find_first(|x| *x == 10)
    });
    assert_eq!(found, Some(10));
    assert!(visited.load(Ordering::Relaxed) < 1000);
}

#[test]
fn panics_cross_every_scheduler() {
    let runtime = pool(4);
    for schedule in schedules() {
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
            runtime.run(|| {
                (0..10_000u32)
                    .into_par_iter()
                    .with_schedule(schedule)
                    .for_each(|x| {
                        if x == 6_789 {
                            panic!("bad item");
                        }
                    })
            })
        }));
        assert!(result.is_err(), "{schedule:?}");
        let sum: u64 = runtime.run(|| (0..100u64).into_par_iter().with_schedule(schedule).sum());
        assert_eq!(sum, 4950);
    }
}
