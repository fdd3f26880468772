//! Early-exit searches instrumented with a consumed-element counter.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::iter::{ParallelIterator, ParallelSlice};
use crate::policy::PolicyKind;
use crate::schedulers::Schedule;

/// A result together with the number of input elements examined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counted<T> {
    pub value: T,
    pub consumed: usize,
}

/// Index of the first element satisfying `pred`.
pub fn find_first_counted<T, F>(
    values: &[T],
    pred: F,
    policies: &[PolicyKind],
    schedule: Schedule,
) -> Counted<Option<usize>>
where
    T: Sync,
    F: Fn(&T) -> bool + Sync + Send,
{
    let consumed = AtomicUsize::new(0);
    let found = values
        .par_iter()
        .count_consumed(&consumed)
        .with_policies(policies)
        .with_schedule(schedule)
        .find_first(|x| pred(x));
    let value = found.map(|x| {
        // SAFETY: `x` points into `values`.
        unsafe { (x as *const T).offset_from(values.as_ptr()) as usize }
    });
    Counted {
        value,
        consumed: consumed.load(Ordering::Relaxed),
    }
}

/// Whether every element satisfies `pred`.
pub fn all_counted<T, F>(
    values: &[T],
    pred: F,
    policies: &[PolicyKind],
    schedule: Schedule,
) -> Counted<bool>
where
    T: Sync,
    F: Fn(&T) -> bool + Sync + Send,
{
    let consumed = AtomicUsize::new(0);
    let value = values
        .par_iter()
        .count_consumed(&consumed)
        .with_policies(policies)
        .with_schedule(schedule)
        .all(|x| pred(x));
    Counted {
        value,
        consumed: consumed.load(Ordering::Relaxed),
    }
}
