use std::collections::BTreeMap;

use splitkit::algorithms::{merge_sort_iter, SortBuffers, SortVariant};
use splitkit::prelude::*;
use splitkit::trace::labels;
use splitkit::ExecutionSpan;

fn traced(workers: usize) -> Runtime {
    Runtime::install(RuntimeConfig::new(workers).record_spans(true)).unwrap()
}

fn check_consistency(spans: &[ExecutionSpan]) {
    let mut by_worker: BTreeMap<usize, Vec<&ExecutionSpan>> = BTreeMap::new();
    for span in spans {
        assert!(span.start_ns <= span.end_ns, "{span:?}");
        if let Some(parent) = span.parent_id {
            assert!(parent < span.task_id, "{span:?}");
        }
        by_worker.entry(span.worker_id).or_default().push(span);
    }
    for lane in by_worker.values_mut() {
        lane.sort_by_key(|s| (s.start_ns, s.end_ns));
        for pair in lane.windows(2) {
            assert!(
                pair[0].end_ns <= pair[1].start_ns,
                "overlap: {:?} / {:?}",
                pair[0],
                pair[1]
            );
        }
    }
}

#[test]
fn untraced_runtime_records_nothing() {
    let runtime = Runtime::install(RuntimeConfig::new(2)).unwrap();
    let _: u64 = runtime.run(|| (0..1000u64).into_par_iter().sum());
    assert!(runtime.take_spans().is_empty());
}

#[test]
fn single_worker_spans_share_the_worker() {
    let runtime = traced(1);
    let _: u64 = runtime.run(|| (0..10_000u64).into_par_iter().bound_depth(3).sum());
    let spans = runtime.take_spans();
    assert_eq!(spans.iter().filter(|s| s.label == labels::LEAF).count(), 8);
    assert!(spans.iter().all(|s| s.worker_id == 0));
    check_consistency(&spans);
}

#[test]
fn nested_sorts_keep_lanes_disjoint() {
    let runtime = traced(4);
    let mut data: Vec<u32> = (0..200_000u32)
        .map(|i| i.wrapping_mul(2_654_435_761))
        .collect();
    let mut scratch = vec![0; data.len()];
    for variant in SortVariant::all() {
        runtime
            .run(|| merge_sort_iter(SortBuffers::new(&mut data, &mut scratch).unwrap(), variant));
    }
    let spans = runtime.take_spans();
    assert!(spans.iter().any(|s| s.label == labels::COMBINE));
    assert!(spans.iter().any(|s| s.label == labels::NANO_LOOP));
    check_consistency(&spans);
    let known = [
        labels::LEAF,
        labels::COMBINE,
        labels::NANO_LOOP,
        labels::BLOCK,
    ];
    assert!(spans.iter().all(|s| known.contains(&s.label.as_str())));
}

#[test]
fn blocks_emit_one_marker_each() {
    let runtime = traced(2);
    let found = runtime.run(|| {
        (0..1000usize)
            .into_par_iter()
            .by_blocks(BlockSchedule::new(4, 2.0))
            .find_first(|x| *x == 200)
    });
    assert_eq!(found, Some(200));
    let markers = runtime
        .take_spans()
        .into_iter()
        .filter(|s| s.label == labels::BLOCK)
        .count();
    // Blocks of 4, 8, 16, 32, 64, 128 end at 252, the first one past 200.
    assert_eq!(markers, 6);
}
