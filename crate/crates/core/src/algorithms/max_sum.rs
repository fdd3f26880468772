//! Maximum sum of a nonempty contiguous subarray.

use crate::divisible::fuse_slices;
use crate::iter::{wrap_iter, ParallelIterator};
use crate::policy::PolicyKind;
use crate::schedulers::Schedule;

/// Kadane's algorithm; 0 for an empty input.
pub fn max_sum_seq(values: &[i64]) -> i64 {
    let mut iter = values.iter();
    let Some(&first) = iter.next() else {
        return 0;
    };
    let (mut best, mut ending_here) = (first, first);
    for &x in iter {
        ending_here = x.max(ending_here + x);
        best = best.max(ending_here);
    }
    best
}

fn best_suffix(values: &[i64]) -> Option<i64> {
    let mut sum = 0;
    values
        .iter()
        .rev()
        .map(|x| {
            sum += x;
            sum
        })
        .max()
}

fn best_prefix(values: &[i64]) -> Option<i64> {
    let mut sum = 0;
    values
        .iter()
        .map(|x| {
            sum += x;
            sum
        })
        .max()
}

/// Parallel maximum subarray sum; 0 for an empty input.
///
/// Each leaf keeps its slice next to its local answer. Combining two
/// adjacent leaves scans the best suffix of the left slice and the best
/// prefix of the right one to account for subarrays crossing the boundary,
/// then fuses the slices back together.
pub fn max_sum_par(values: &[i64]) -> i64 {
    max_sum_with(
        values,
        &[PolicyKind::ThiefSplitting(None)],
        Schedule::default(),
    )
}

/// [`max_sum_par`] with the leaves chosen by other policies and schedule.
pub fn max_sum_with(values: &[i64], policies: &[PolicyKind], schedule: Schedule) -> i64 {
    wrap_iter(values)
        .map(|slice| (slice, (!slice.is_empty()).then(|| max_sum_seq(slice))))
        .with_policies(policies)
        .with_schedule(schedule)
        .reduce_with(|(left, left_best), (right, right_best)| {
            let crossing = best_suffix(left)
                .zip(best_prefix(right))
                .map(|(s, p)| s + p);
            let best = [left_best, right_best, crossing]
                .into_iter()
                .flatten()
                .max();
            (fuse_slices(left, right), best)
        })
        .and_then(|(_, best)| best)
        .unwrap_or(0)
}
