//! Algorithms built from the iterator, policy and scheduler layers.

mod fannkuch;
mod max_sum;
mod search;
mod sort;

use std::collections::LinkedList;

pub use fannkuch::{
    fannkuch, fannkuch_counted, FannkuchError, FannkuchPolicy, FannkuchResult, MAX_FANNKUCH_N,
};
pub use max_sum::{max_sum_par, max_sum_seq, max_sum_with};
pub use search::{all_counted, find_first_counted, Counted};
pub use sort::{
    merge_slices_adaptive, merge_sort_iter, MergePolicy, SortBuffers, SortSplit, SortVariant,
};

use crate::iter::{ParallelIterator, ParallelSlice};
use crate::policy::PolicyKind;
use crate::schedulers::Schedule;

/// Even values of `values` in input order, gathered as per-leaf vectors
/// linked into a list and flattened at the end.
pub fn filter_collect_even(values: &[i64]) -> Vec<i64> {
    filter_collect_even_with(values, &[], Schedule::default())
}

/// [`filter_collect_even`] under the given policies and schedule.
pub fn filter_collect_even_with(
    values: &[i64],
    policies: &[PolicyKind],
    schedule: Schedule,
) -> Vec<i64> {
    let chunks = values
        .par_iter()
        .copied()
        .filter(|x| x % 2 == 0)
        .with_policies(policies)
        .with_schedule(schedule)
        .fold(Vec::new, |mut chunk, x| {
            chunk.push(x);
            chunk
        })
        .map(|chunk| {
            let mut list = LinkedList::new();
            list.push_back(chunk);
            list
        })
        .reduce(LinkedList::new, |mut left, mut right| {
            left.append(&mut right);
            left
        });
    chunks.into_iter().flatten().collect()
}
