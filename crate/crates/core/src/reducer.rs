//! Reducers collapse a division tree into one value.

use std::collections::LinkedList;
use std::iter::Sum;
use std::marker::PhantomData;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

use crate::divisible::Producer;

/// Largest piece folded at once by short-circuiting reducers; bounds the
/// work done past a match.
const SHORT_CIRCUIT_CHUNK: usize = 128;

/// Identity, sequential fold and associative combine over items `T`.
///
/// `offset` arguments are positions in base units of the root source; they
/// let early-exit reducers compare the position of independent tasks.
pub trait Reducer<T>: Sync {
    type Acc: Send;

    fn identity(&self) -> Self::Acc;

    fn fold_item(&self, acc: Self::Acc, item: T) -> Self::Acc;

    fn combine(&self, left: Self::Acc, right: Self::Acc) -> Self::Acc;

    /// Folds at most `limit` base units of `producer` into `acc`.
    fn fold_chunk<P>(
        &self,
        acc: Self::Acc,
        producer: &mut P,
        limit: usize,
        offset: usize,
    ) -> Self::Acc
    where
        P: Producer<Item = T>,
    {
        let _ = offset;
        producer.partial_fold(acc, |acc, item| self.fold_item(acc, item), limit)
    }

    /// Folds a whole leaf.
    fn leaf_fold<P>(&self, mut producer: P, offset: usize) -> Self::Acc
    where
        P: Producer<Item = T>,
    {
        self.fold_chunk(self.identity(), &mut producer, usize::MAX, offset)
    }

    /// True when `acc` already determines the final result of its task.
    fn is_done(&self, acc: &Self::Acc) -> bool {
        let _ = acc;
        false
    }

    /// True when work starting at `offset` cannot change the final result.
    fn should_stop(&self, offset: usize) -> bool {
        let _ = offset;
        false
    }
}

pub struct ReduceReducer<ID, OP> {
    identity: ID,
    op: OP,
}

impl<ID, OP> ReduceReducer<ID, OP> {
    pub fn new(identity: ID, op: OP) -> Self {
        ReduceReducer { identity, op }
    }
}

impl<T, ID, OP> Reducer<T> for ReduceReducer<ID, OP>
where
    T: Send,
    ID: Fn() -> T + Sync,
    OP: Fn(T, T) -> T + Sync,
{
    type Acc = T;

    fn identity(&self) -> T {
        (self.identity)()
    }

    fn fold_item(&self, acc: T, item: T) -> T {
        (self.op)(acc, item)
    }

    fn combine(&self, left: T, right: T) -> T {
        (self.op)(left, right)
    }
}

/// Reduction without identity: empty inputs give `None`.
pub struct ReduceWithReducer<OP> {
    op: OP,
}

impl<OP> ReduceWithReducer<OP> {
    pub fn new(op: OP) -> Self {
        ReduceWithReducer { op }
    }
}

impl<T, OP> Reducer<T> for ReduceWithReducer<OP>
where
    T: Send,
    OP: Fn(T, T) -> T + Sync,
{
    type Acc = Option<T>;

    fn identity(&self) -> Option<T> {
        None
    }

    fn fold_item(&self, acc: Option<T>, item: T) -> Option<T> {
        Some(match acc {
            Some(acc) => (self.op)(acc, item),
            None => item,
        })
    }

    fn combine(&self, left: Option<T>, right: Option<T>) -> Option<T> {
        match (left, right) {
            (Some(l), Some(r)) => Some((self.op)(l, r)),
            (l, None) => l,
            (None, r) => r,
        }
    }
}

pub struct SumReducer<S>(PhantomData<fn() -> S>);

impl<S> SumReducer<S> {
    pub fn new() -> Self {
        SumReducer(PhantomData)
    }
}

impl<S> Default for SumReducer<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T, S> Reducer<T> for SumReducer<S>
where
    S: Sum<T> + Sum<S> + Send,
{
    type Acc = S;

    fn identity(&self) -> S {
        std::iter::empty::<S>().sum()
    }

    fn fold_item(&self, acc: S, item: T) -> S {
        [acc, std::iter::once(item).sum()].into_iter().sum()
    }

    fn combine(&self, left: S, right: S) -> S {
        [left, right].into_iter().sum()
    }
}

pub struct CountReducer;

impl<T> Reducer<T> for CountReducer {
    type Acc = usize;

    fn identity(&self) -> usize {
        0
    }

    fn fold_item(&self, acc: usize, _item: T) -> usize {
        acc + 1
    }

    fn combine(&self, left: usize, right: usize) -> usize {
        left + right
    }
}

pub struct ForEachReducer<F> {
    op: F,
}

impl<F> ForEachReducer<F> {
    pub fn new(op: F) -> Self {
        ForEachReducer { op }
    }
}

impl<T, F> Reducer<T> for ForEachReducer<F>
where
    F: Fn(T) + Sync,
{
    type Acc = ();

    fn identity(&self) {}

    fn fold_item(&self, _acc: (), item: T) {
        (self.op)(item)
    }

    fn combine(&self, _left: (), _right: ()) {}
}

/// Collects into a list of per-chunk vectors, concatenated in order.
pub struct CollectReducer;

impl<T: Send> Reducer<T> for CollectReducer {
    type Acc = LinkedList<Vec<T>>;

    fn identity(&self) -> Self::Acc {
        LinkedList::new()
    }

    fn fold_item(&self, mut acc: Self::Acc, item: T) -> Self::Acc {
        match acc.back_mut() {
            Some(last) => last.push(item),
            None => acc.push_back(vec![item]),
        }
        acc
    }

    fn combine(&self, mut left: Self::Acc, mut right: Self::Acc) -> Self::Acc {
        left.append(&mut right);
        left
    }

    fn fold_chunk<P>(
        &self,
        mut acc: Self::Acc,
        producer: &mut P,
        limit: usize,
        _offset: usize,
    ) -> Self::Acc
    where
        P: Producer<Item = T>,
    {
        let chunk = producer.partial_fold(
            Vec::new(),
            |mut v, item| {
                v.push(item);
                v
            },
            limit,
        );
        if !chunk.is_empty() {
            acc.push_back(chunk);
        }
        acc
    }
}

/// Minimal-position match. Tasks lying entirely after an already found
/// match stop at their next poll point.
pub struct FindFirstReducer<F> {
    pred: F,
    best: AtomicUsize,
}

impl<F> FindFirstReducer<F> {
    pub fn new(pred: F) -> Self {
        FindFirstReducer {
            pred,
            best: AtomicUsize::new(usize::MAX),
        }
    }
}

impl<T, F> Reducer<T> for FindFirstReducer<F>
where
    T: Send,
    F: Fn(&T) -> bool + Sync,
{
    type Acc = Option<T>;

    fn identity(&self) -> Option<T> {
        None
    }

    fn fold_item(&self, acc: Option<T>, item: T) -> Option<T> {
        match acc {
            None if (self.pred)(&item) => Some(item),
            acc => acc,
        }
    }

    fn combine(&self, left: Option<T>, right: Option<T>) -> Option<T> {
        left.or(right)
    }

    fn fold_chunk<P>(
        &self,
        acc: Option<T>,
        producer: &mut P,
        limit: usize,
        offset: usize,
    ) -> Option<T>
    where
        P: Producer<Item = T>,
    {
        if acc.is_some() {
            return acc;
        }
        let mut done = 0;
        let mut position = offset;
        while done < limit && producer.base_length() > 0 {
            if self.should_stop(position) {
                return None;
            }
            let before = producer.base_length();
            let chunk = (limit - done).min(SHORT_CIRCUIT_CHUNK);
            let found = producer.partial_fold(None, |acc, item| self.fold_item(acc, item), chunk);
            if found.is_some() {
                // The chunk start is a lower bound of the match position,
                // and no other task's range overlaps this chunk.
                self.best.fetch_min(position, Ordering::Relaxed);
                return found;
            }
            let used = before.saturating_sub(producer.base_length());
            if used == 0 {
                break;
            }
            done += used;
            position += used;
        }
        None
    }

    fn is_done(&self, acc: &Option<T>) -> bool {
        acc.is_some()
    }

    fn should_stop(&self, offset: usize) -> bool {
        self.best.load(Ordering::Relaxed) < offset
    }
}

/// Conjunction of a predicate; every task stops once a counterexample is
/// known anywhere.
pub struct AllReducer<F> {
    pred: F,
    failed: AtomicBool,
}

impl<F> AllReducer<F> {
    pub fn new(pred: F) -> Self {
        AllReducer {
            pred,
            failed: AtomicBool::new(false),
        }
    }
}

impl<T, F> Reducer<T> for AllReducer<F>
where
    F: Fn(&T) -> bool + Sync,
{
    type Acc = bool;

    fn identity(&self) -> bool {
        true
    }

    fn fold_item(&self, acc: bool, item: T) -> bool {
        acc && (self.pred)(&item)
    }

    fn combine(&self, left: bool, right: bool) -> bool {
        left && right
    }

    fn fold_chunk<P>(&self, acc: bool, producer: &mut P, limit: usize, _offset: usize) -> bool
    where
        P: Producer<Item = T>,
    {
        if !acc {
            return false;
        }
        let mut done = 0;
        while done < limit && producer.base_length() > 0 {
            if self.failed.load(Ordering::Relaxed) {
                return true;
            }
            let before = producer.base_length();
            let chunk = (limit - done).min(SHORT_CIRCUIT_CHUNK);
            if !producer.partial_fold(true, |acc, item| self.fold_item(acc, item), chunk) {
                self.failed.store(true, Ordering::Relaxed);
                return false;
            }
            let used = before.saturating_sub(producer.base_length());
            if used == 0 {
                break;
            }
            done += used;
        }
        true
    }

    fn is_done(&self, acc: &bool) -> bool {
        !*acc
    }

    fn should_stop(&self, _offset: usize) -> bool {
        self.failed.load(Ordering::Relaxed)
    }
}
