use std::ops::Range;
use std::sync::Arc;

use super::{IndexedParallelIterator, ParallelIterator};
use crate::divisible::{Divisible, Producer};
use crate::schedulers::{AdaptiveConfig, Schedule, Scheduler};

pub trait IntoParallelIterator {
    type Item;
    type Iter: ParallelIterator<Item = Self::Item>;

    fn into_par_iter(self) -> Self::Iter;
}

impl<I: ParallelIterator> IntoParallelIterator for I {
    type Item = I::Item;
    type Iter = I;

    fn into_par_iter(self) -> I {
        self
    }
}

/// Parallel iterator over an integer range.
#[derive(Debug, Clone)]
pub struct RangeIter<T> {
    range: Range<T>,
}

macro_rules! range_sources {
    ($($t:ty),*) => {$(
        impl IntoParallelIterator for Range<$t> {
            type Item = $t;
            type Iter = RangeIter<$t>;

            fn into_par_iter(self) -> RangeIter<$t> {
                RangeIter { range: self }
            }
        }

        impl ParallelIterator for RangeIter<$t> {
            type Item = $t;
            type Producer = Range<$t>;

            fn into_producer(self) -> Range<$t> {
                self.range
            }
        }

        impl IndexedParallelIterator for RangeIter<$t> {
            fn len(&self) -> usize {
                self.range.base_length()
            }
        }
    )*};
}

range_sources!(usize, u64, u32, i64, i32);

#[derive(Debug)]
pub struct SliceIter<'a, T> {
    pub(super) slice: &'a [T],
}

impl<T> Clone for SliceIter<'_, T> {
    fn clone(&self) -> Self {
        SliceIter { slice: self.slice }
    }
}

impl<'a, T: Sync> ParallelIterator for SliceIter<'a, T> {
    type Item = &'a T;
    type Producer = std::slice::Iter<'a, T>;

    fn into_producer(self) -> Self::Producer {
        self.slice.iter()
    }
}

impl<T: Sync> IndexedParallelIterator for SliceIter<'_, T> {
    fn len(&self) -> usize {
        self.slice.len()
    }
}

#[derive(Debug)]
pub struct SliceIterMut<'a, T> {
    slice: &'a mut [T],
}

impl<'a, T: Send> ParallelIterator for SliceIterMut<'a, T> {
    type Item = &'a mut T;
    type Producer = std::slice::IterMut<'a, T>;

    fn into_producer(self) -> Self::Producer {
        self.slice.iter_mut()
    }
}

impl<T: Send> IndexedParallelIterator for SliceIterMut<'_, T> {
    fn len(&self) -> usize {
        self.slice.len()
    }
}

pub trait ParallelSlice<T: Sync> {
    fn par_iter(&self) -> SliceIter<'_, T>;
}

impl<T: Sync> ParallelSlice<T> for [T] {
    fn par_iter(&self) -> SliceIter<'_, T> {
        SliceIter { slice: self }
    }
}

pub trait ParallelSliceMut<T: Send> {
    fn par_iter_mut(&mut self) -> SliceIterMut<'_, T>;
}

impl<T: Send> ParallelSliceMut<T> for [T] {
    fn par_iter_mut(&mut self) -> SliceIterMut<'_, T> {
        SliceIterMut { slice: self }
    }
}

/// Turns any divisible source into a parallel iterator whose items are the
/// undivided pieces chosen at run time.
pub fn wrap_iter<D: Divisible>(source: D) -> WrapIter<D> {
    WrapIter { source }
}

#[derive(Debug)]
pub struct WrapIter<D> {
    source: D,
}

impl<D: Divisible> ParallelIterator for WrapIter<D> {
    type Item = D;
    type Producer = Wrapped<D>;

    fn into_producer(self) -> Wrapped<D> {
        Wrapped {
            inner: Some(self.source),
        }
    }
}

impl<D: Divisible> IndexedParallelIterator for WrapIter<D> {
    fn len(&self) -> usize {
        self.source.base_length()
    }
}

/// Producer yielding its whole source as a single item.
///
/// A piece is yielded even when empty, so every leaf of a division tree
/// contributes exactly one item. A bounded fold yields the prefix of the
/// requested length.
#[derive(Debug)]
pub struct Wrapped<D> {
    inner: Option<D>,
}

impl<D: Divisible> Divisible for Wrapped<D> {
    fn base_length(&self) -> usize {
        self.inner.as_ref().map_or(0, D::base_length)
    }

    fn should_be_divided(&self) -> bool {
        self.inner.as_ref().is_some_and(D::should_be_divided)
    }

    fn divide(self) -> (Self, Self) {
        match self.inner {
            Some(d) => {
                let (l, r) = d.divide();
                (Wrapped { inner: Some(l) }, Wrapped { inner: Some(r) })
            }
            None => (Wrapped { inner: None }, Wrapped { inner: None }),
        }
    }

    fn divide_at(self, index: usize) -> (Self, Self) {
        match self.inner {
            Some(d) => {
                let (l, r) = d.divide_at(index);
                (Wrapped { inner: Some(l) }, Wrapped { inner: Some(r) })
            }
            None => (Wrapped { inner: None }, Wrapped { inner: None }),
        }
    }

    fn cut_at(self, index: usize) -> (Self, Self) {
        match self.inner {
            Some(d) => {
                let (l, r) = d.cut_at(index);
                (Wrapped { inner: Some(l) }, Wrapped { inner: Some(r) })
            }
            None => (Wrapped { inner: None }, Wrapped { inner: None }),
        }
    }
}

impl<D> Iterator for Wrapped<D> {
    type Item = D;

    fn next(&mut self) -> Option<D> {
        self.inner.take()
    }
}

impl<D: Divisible> Producer for Wrapped<D> {
    fn partial_fold<B, F>(&mut self, init: B, mut fold_op: F, limit: usize) -> B
    where
        F: FnMut(B, D) -> B,
    {
        if limit == 0 {
            return init;
        }
        match self.inner.take() {
            None => init,
            Some(d) if limit >= d.base_length() => fold_op(init, d),
            Some(d) => {
                let (head, rest) = d.divide_at(limit);
                self.inner = Some(rest);
                fold_op(init, head)
            }
        }
    }
}

/// Stateful computation advanced in bounded steps.
///
/// `advance(state, budget)` performs at most `budget` units of work; the
/// state reports its remaining work through [`Divisible::base_length`] and
/// is complete at length zero. The iterator yields completed states. Unless
/// another scheduler is selected, it runs under the adaptive scheduler, so
/// a state is divided only when a worker asks for work and each part
/// resumes from where the division left it.
pub fn work<S, F>(state: S, advance: F) -> WorkIter<S, F>
where
    S: Divisible,
    F: Fn(&mut S, usize) + Sync + Send,
{
    WorkIter { state, advance }
}

pub struct WorkIter<S, F> {
    state: S,
    advance: F,
}

impl<S, F> ParallelIterator for WorkIter<S, F>
where
    S: Divisible,
    F: Fn(&mut S, usize) + Sync + Send,
{
    type Item = S;
    type Producer = WorkProducer<S, F>;

    fn into_producer(self) -> Self::Producer {
        WorkProducer {
            state: Some(self.state),
            advance: Arc::new(self.advance),
        }
    }

    fn schedule(&self) -> Schedule {
        Schedule {
            scheduler: Scheduler::Adaptive(AdaptiveConfig::default()),
            blocks: None,
        }
    }
}

impl<S, F> IndexedParallelIterator for WorkIter<S, F>
where
    S: Divisible,
    F: Fn(&mut S, usize) + Sync + Send,
{
    fn len(&self) -> usize {
        self.state.base_length()
    }
}

pub struct WorkProducer<S, F> {
    state: Option<S>,
    advance: Arc<F>,
}

impl<S, F> WorkProducer<S, F> {
    fn pair(&self, left: Option<S>, right: Option<S>) -> (Self, Self) {
        (
            WorkProducer {
                state: left,
                advance: Arc::clone(&self.advance),
            },
            WorkProducer {
                state: right,
                advance: Arc::clone(&self.advance),
            },
        )
    }
}

impl<S, F> Divisible for WorkProducer<S, F>
where
    S: Divisible,
    F: Fn(&mut S, usize) + Sync + Send,
{
    fn base_length(&self) -> usize {
        self.state.as_ref().map_or(0, S::base_length)
    }

    fn should_be_divided(&self) -> bool {
        self.state.as_ref().is_some_and(S::should_be_divided)
    }

    fn divide(mut self) -> (Self, Self) {
        match self.state.take() {
            Some(s) => {
                let (l, r) = s.divide();
                self.pair(Some(l), Some(r))
            }
            None => self.pair(None, None),
        }
    }

    fn divide_at(mut self, index: usize) -> (Self, Self) {
        match self.state.take() {
            Some(s) => {
                let (l, r) = s.divide_at(index);
                self.pair(Some(l), Some(r))
            }
            None => self.pair(None, None),
        }
    }

    fn cut_at(mut self, index: usize) -> (Self, Self) {
        match self.state.take() {
            Some(s) => {
                let (l, r) = s.cut_at(index);
                self.pair(Some(l), Some(r))
            }
            None => self.pair(None, None),
        }
    }
}

impl<S, F> Iterator for WorkProducer<S, F>
where
    S: Divisible,
    F: Fn(&mut S, usize),
{
    type Item = S;

    fn next(&mut self) -> Option<S> {
        let mut state = self.state.take()?;
        while state.base_length() > 0 {
            let budget = state.base_length();
            (self.advance)(&mut state, budget);
        }
        Some(state)
    }
}

impl<S, F> Producer for WorkProducer<S, F>
where
    S: Divisible,
    F: Fn(&mut S, usize) + Sync + Send,
{
    fn partial_fold<B, G>(&mut self, init: B, mut fold_op: G, limit: usize) -> B
    where
        G: FnMut(B, S) -> B,
    {
        if limit == 0 {
            return init;
        }
        let Some(state) = self.state.as_mut() else {
            return init;
        };
        if state.base_length() > 0 {
            (self.advance)(state, limit);
        }
        if state.base_length() == 0 {
            let done = self.state.take().expect("state present");
            fold_op(init, done)
        } else {
            init
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrapped_yields_empty_piece_once() {
        let data: [u8; 0] = [];
        let mut producer = wrap_iter(&data[..]).into_producer();
        let items = producer.partial_fold(
            Vec::new(),
            |mut v, s| {
                v.push(s.len());
                v
            },
            5,
        );
        assert_eq!(items, vec![0]);
        assert_eq!(producer.next(), None);
    }

    #[test]
    fn wrapped_bounded_fold_yields_prefix() {
        let data = [1, 2, 3, 4, 5];
        let mut producer = wrap_iter(&data[..]).into_producer();
        let first = producer.partial_fold(
            Vec::new(),
            |mut v, s: &[i32]| {
                v.push(s.to_vec());
                v
            },
            2,
        );
        assert_eq!(first, vec![vec![1, 2]]);
        assert_eq!(producer.base_length(), 3);
    }

    #[test]
    fn work_producer_respects_budget() {
        let mut producer = work(0u32..10, |range: &mut Range<u32>, budget| {
            let (_, rest) = range.clone().divide_at(budget);
            *range = rest;
        })
        .into_producer();
        assert_eq!(producer.partial_fold(0, |n, _| n + 1, 4), 0);
        assert_eq!(producer.base_length(), 6);
        assert_eq!(producer.partial_fold(0, |n, _| n + 1, 100), 1);
        assert_eq!(producer.base_length(), 0);
    }
}
