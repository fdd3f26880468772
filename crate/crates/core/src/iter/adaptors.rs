use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use super::{IndexedParallelIterator, ParallelIterator};
use crate::divisible::{Divisible, Producer};
use crate::policy::{PolicyProducer, SplitPolicy};
use crate::schedulers::Schedule;

/// Implements `Divisible` for a single-base wrapper by rebuilding it around
/// each part of the base.
macro_rules! forward_divisible {
    ($self:ident, $base:ident, $rebuild:expr) => {
        #[inline]
        fn base_length(&self) -> usize {
            self.$base.base_length()
        }

        fn should_be_divided(&self) -> bool {
            self.$base.should_be_divided()
        }

        fn divide($self) -> (Self, Self) {
            let (l, r) = $self.$base.divide();
            let rebuild = $rebuild;
            rebuild(l, r)
        }

        fn divide_at($self, index: usize) -> (Self, Self) {
            let (l, r) = $self.$base.divide_at(index);
            let rebuild = $rebuild;
            rebuild(l, r)
        }

        fn cut_at($self, index: usize) -> (Self, Self) {
            let (l, r) = $self.$base.cut_at(index);
            let rebuild = $rebuild;
            rebuild(l, r)
        }
    };
}

pub struct Map<I, F> {
    base: I,
    f: F,
}

impl<I, F> Map<I, F> {
    pub(super) fn new(base: I, f: F) -> Self {
        Map { base, f }
    }
}

impl<I, F, U> ParallelIterator for Map<I, F>
where
    I: ParallelIterator,
    F: Fn(I::Item) -> U + Sync + Send,
{
    type Item = U;
    type Producer = MapProducer<I::Producer, F>;

    fn into_producer(self) -> Self::Producer {
        MapProducer {
            base: self.base.into_producer(),
            f: Arc::new(self.f),
        }
    }

    fn schedule(&self) -> Schedule {
        self.base.schedule()
    }
}

impl<I, F, U> IndexedParallelIterator for Map<I, F>
where
    I: IndexedParallelIterator,
    F: Fn(I::Item) -> U + Sync + Send,
{
    fn len(&self) -> usize {
        self.base.len()
    }
}

pub struct MapProducer<P, F> {
    base: P,
    f: Arc<F>,
}

impl<P, F, U> Divisible for MapProducer<P, F>
where
    P: Producer,
    F: Fn(P::Item) -> U + Sync + Send,
{
    forward_divisible!(self, base, |l, r| {
        let f = self.f;
        (
            MapProducer {
                base: l,
                f: Arc::clone(&f),
            },
            MapProducer { base: r, f },
        )
    });
}

impl<P, F, U> Iterator for MapProducer<P, F>
where
    P: Iterator,
    F: Fn(P::Item) -> U,
{
    type Item = U;

    #[inline]
    fn next(&mut self) -> Option<U> {
        self.base.next().map(&*self.f)
    }

    fn fold<B, G>(self, init: B, mut g: G) -> B
    where
        G: FnMut(B, U) -> B,
    {
        let f = self.f;
        self.base.fold(init, move |acc, x| g(acc, f(x)))
    }
}

impl<P, F, U> Producer for MapProducer<P, F>
where
    P: Producer,
    F: Fn(P::Item) -> U + Sync + Send,
{
    fn partial_fold<B, G>(&mut self, init: B, mut fold_op: G, limit: usize) -> B
    where
        G: FnMut(B, U) -> B,
    {
        let f = &*self.f;
        self.base
            .partial_fold(init, |acc, x| fold_op(acc, f(x)), limit)
    }
}

pub struct Filter<I, F> {
    base: I,
    pred: F,
}

impl<I, F> Filter<I, F> {
    pub(super) fn new(base: I, pred: F) -> Self {
        Filter { base, pred }
    }
}

impl<I, F> ParallelIterator for Filter<I, F>
where
    I: ParallelIterator,
    F: Fn(&I::Item) -> bool + Sync + Send,
{
    type Item = I::Item;
    type Producer = FilterProducer<I::Producer, F>;

    fn into_producer(self) -> Self::Producer {
        FilterProducer {
            base: self.base.into_producer(),
            pred: Arc::new(self.pred),
        }
    }

    fn schedule(&self) -> Schedule {
        self.base.schedule()
    }
}

/// Lengths of a filter producer are those of its base.
pub struct FilterProducer<P, F> {
    base: P,
    pred: Arc<F>,
}

impl<P, F> Divisible for FilterProducer<P, F>
where
    P: Producer,
    F: Fn(&P::Item) -> bool + Sync + Send,
{
    forward_divisible!(self, base, |l, r| {
        let pred = self.pred;
        (
            FilterProducer {
                base: l,
                pred: Arc::clone(&pred),
            },
            FilterProducer { base: r, pred },
        )
    });
}

impl<P, F> Iterator for FilterProducer<P, F>
where
    P: Iterator,
    F: Fn(&P::Item) -> bool,
{
    type Item = P::Item;

    fn next(&mut self) -> Option<P::Item> {
        let pred = &*self.pred;
        self.base.find(|x| pred(x))
    }

    fn fold<B, G>(self, init: B, mut g: G) -> B
    where
        G: FnMut(B, P::Item) -> B,
    {
        let pred = self.pred;
        self.base
            .fold(init, move |acc, x| if pred(&x) { g(acc, x) } else { acc })
    }
}

impl<P, F> Producer for FilterProducer<P, F>
where
    P: Producer,
    F: Fn(&P::Item) -> bool + Sync + Send,
{
    fn partial_fold<B, G>(&mut self, init: B, mut fold_op: G, limit: usize) -> B
    where
        G: FnMut(B, P::Item) -> B,
    {
        let pred = &*self.pred;
        self.base.partial_fold(
            init,
            |acc, x| if pred(&x) { fold_op(acc, x) } else { acc },
            limit,
        )
    }
}

pub struct Zip<A, B> {
    a: A,
    b: B,
}

impl<A, B> Zip<A, B> {
    pub(super) fn new(a: A, b: B) -> Self {
        Zip { a, b }
    }
}

impl<A, B> ParallelIterator for Zip<A, B>
where
    A: IndexedParallelIterator,
    B: IndexedParallelIterator,
{
    type Item = (A::Item, B::Item);
    type Producer = ZipProducer<A::Producer, B::Producer>;

    fn into_producer(self) -> Self::Producer {
        ZipProducer {
            a: self.a.into_producer(),
            b: self.b.into_producer(),
        }
    }

    fn schedule(&self) -> Schedule {
        self.a.schedule()
    }
}

impl<A, B> IndexedParallelIterator for Zip<A, B>
where
    A: IndexedParallelIterator,
    B: IndexedParallelIterator,
{
    fn len(&self) -> usize {
        self.a.len()
    }
}

/// Zipped producers follow the division choices of the first one.
pub struct ZipProducer<A, B> {
    a: A,
    b: B,
}

impl<A: Producer, B: Producer> Divisible for ZipProducer<A, B> {
    fn base_length(&self) -> usize {
        self.a.base_length()
    }

    fn should_be_divided(&self) -> bool {
        self.a.should_be_divided() && self.b.should_be_divided()
    }

    fn divide(self) -> (Self, Self) {
        let (al, ar) = self.a.divide();
        let (bl, br) = self.b.divide_at(al.base_length());
        (ZipProducer { a: al, b: bl }, ZipProducer { a: ar, b: br })
    }

    fn divide_at(self, index: usize) -> (Self, Self) {
        let (al, ar) = self.a.divide_at(index);
        let (bl, br) = self.b.divide_at(al.base_length());
        (ZipProducer { a: al, b: bl }, ZipProducer { a: ar, b: br })
    }

    fn cut_at(self, index: usize) -> (Self, Self) {
        let (al, ar) = self.a.cut_at(index);
        let (bl, br) = self.b.cut_at(al.base_length());
        (ZipProducer { a: al, b: bl }, ZipProducer { a: ar, b: br })
    }
}

impl<A: Iterator, B: Iterator> Iterator for ZipProducer<A, B> {
    type Item = (A::Item, B::Item);

    #[inline]
    fn next(&mut self) -> Option<Self::Item> {
        let a = self.a.next()?;
        let b = self.b.next()?;
        Some((a, b))
    }
}

impl<A: Producer, B: Producer> Producer for ZipProducer<A, B> {
    fn partial_fold<T, G>(&mut self, init: T, mut fold_op: G, limit: usize) -> T
    where
        G: FnMut(T, Self::Item) -> T,
    {
        let mut acc = init;
        for _ in 0..limit.min(self.base_length()) {
            match self.next() {
                Some(item) => acc = fold_op(acc, item),
                None => break,
            }
        }
        acc
    }
}

pub struct Fold<I, ID, F> {
    base: I,
    identity: ID,
    fold_op: F,
}

impl<I, ID, F> Fold<I, ID, F> {
    pub(super) fn new(base: I, identity: ID, fold_op: F) -> Self {
        Fold {
            base,
            identity,
            fold_op,
        }
    }
}

impl<I, ID, F, U> ParallelIterator for Fold<I, ID, F>
where
    I: ParallelIterator,
    ID: Fn() -> U + Sync + Send,
    F: Fn(U, I::Item) -> U + Sync + Send,
{
    type Item = U;
    type Producer = FoldProducer<I::Producer, ID, F>;

    fn into_producer(self) -> Self::Producer {
        FoldProducer {
            base: self.base.into_producer(),
            identity: Arc::new(self.identity),
            fold_op: Arc::new(self.fold_op),
        }
    }

    fn schedule(&self) -> Schedule {
        self.base.schedule()
    }
}

/// Each bounded fold of this producer yields one accumulator covering the
/// base items it consumed.
pub struct FoldProducer<P, ID, F> {
    base: P,
    identity: Arc<ID>,
    fold_op: Arc<F>,
}

impl<P, ID, F, U> Divisible for FoldProducer<P, ID, F>
where
    P: Producer,
    ID: Fn() -> U + Sync + Send,
    F: Fn(U, P::Item) -> U + Sync + Send,
{
    forward_divisible!(self, base, |l, r| {
        let (identity, fold_op) = (self.identity, self.fold_op);
        (
            FoldProducer {
                base: l,
                identity: Arc::clone(&identity),
                fold_op: Arc::clone(&fold_op),
            },
            FoldProducer {
                base: r,
                identity,
                fold_op,
            },
        )
    });
}

impl<P, ID, F, U> Iterator for FoldProducer<P, ID, F>
where
    P: Producer,
    ID: Fn() -> U,
    F: Fn(U, P::Item) -> U,
{
    type Item = U;

    fn next(&mut self) -> Option<U> {
        if self.base.base_length() == 0 {
            return None;
        }
        let op = &*self.fold_op;
        Some(self.base.by_ref().fold((self.identity)(), op))
    }
}

impl<P, ID, F, U> Producer for FoldProducer<P, ID, F>
where
    P: Producer,
    ID: Fn() -> U + Sync + Send,
    F: Fn(U, P::Item) -> U + Sync + Send,
{
    fn partial_fold<B, G>(&mut self, init: B, mut fold_op: G, limit: usize) -> B
    where
        G: FnMut(B, U) -> B,
    {
        if limit == 0 || self.base.base_length() == 0 {
            return init;
        }
        let op = &*self.fold_op;
        let chunk = self.base.partial_fold((self.identity)(), op, limit);
        fold_op(init, chunk)
    }
}

pub struct Copied<I> {
    base: I,
}

impl<I> Copied<I> {
    pub(super) fn new(base: I) -> Self {
        Copied { base }
    }
}

impl<'a, T, I> ParallelIterator for Copied<I>
where
    I: ParallelIterator<Item = &'a T>,
    T: Copy + 'a,
{
    type Item = T;
    type Producer = CopiedProducer<I::Producer>;

    fn into_producer(self) -> Self::Producer {
        CopiedProducer {
            base: self.base.into_producer(),
        }
    }

    fn schedule(&self) -> Schedule {
        self.base.schedule()
    }
}

impl<'a, T, I> IndexedParallelIterator for Copied<I>
where
    I: IndexedParallelIterator<Item = &'a T>,
    T: Copy + 'a,
{
    fn len(&self) -> usize {
        self.base.len()
    }
}

pub struct CopiedProducer<P> {
    base: P,
}

impl<'a, T, P> Divisible for CopiedProducer<P>
where
    P: Producer<Item = &'a T>,
    T: Copy + 'a,
{
    forward_divisible!(self, base, |l, r| (
        CopiedProducer { base: l },
        CopiedProducer { base: r }
    ));
}

impl<'a, T, P> Iterator for CopiedProducer<P>
where
    P: Iterator<Item = &'a T>,
    T: Copy + 'a,
{
    type Item = T;

    #[inline]
    fn next(&mut self) -> Option<T> {
        self.base.next().copied()
    }

    fn fold<B, G>(self, init: B, mut g: G) -> B
    where
        G: FnMut(B, T) -> B,
    {
        self.base.fold(init, move |acc, x| g(acc, *x))
    }
}

impl<'a, T, P> Producer for CopiedProducer<P>
where
    P: Producer<Item = &'a T>,
    T: Copy + 'a,
{
    fn partial_fold<B, G>(&mut self, init: B, mut fold_op: G, limit: usize) -> B
    where
        G: FnMut(B, T) -> B,
    {
        self.base
            .partial_fold(init, |acc, x| fold_op(acc, *x), limit)
    }
}

pub struct CountConsumed<'c, I> {
    base: I,
    counter: &'c AtomicUsize,
}

impl<'c, I> CountConsumed<'c, I> {
    pub(super) fn new(base: I, counter: &'c AtomicUsize) -> Self {
        CountConsumed { base, counter }
    }
}

impl<'c, I: ParallelIterator> ParallelIterator for CountConsumed<'c, I> {
    type Item = I::Item;
    type Producer = CountProducer<'c, I::Producer>;

    fn into_producer(self) -> Self::Producer {
        CountProducer {
            base: self.base.into_producer(),
            counter: self.counter,
        }
    }

    fn schedule(&self) -> Schedule {
        self.base.schedule()
    }
}

impl<I: IndexedParallelIterator> IndexedParallelIterator for CountConsumed<'_, I> {
    fn len(&self) -> usize {
        self.base.len()
    }
}

pub struct CountProducer<'c, P> {
    base: P,
    counter: &'c AtomicUsize,
}

impl<P: Producer> Divisible for CountProducer<'_, P> {
    forward_divisible!(self, base, |l, r| {
        let counter = self.counter;
        (
            CountProducer { base: l, counter },
            CountProducer { base: r, counter },
        )
    });
}

impl<P: Iterator> Iterator for CountProducer<'_, P> {
    type Item = P::Item;

    fn next(&mut self) -> Option<P::Item> {
        let item = self.base.next()?;
        self.counter.fetch_add(1, Ordering::Relaxed);
        Some(item)
    }
}

impl<P: Producer> Producer for CountProducer<'_, P> {
    fn partial_fold<B, G>(&mut self, init: B, fold_op: G, limit: usize) -> B
    where
        G: FnMut(B, P::Item) -> B,
    {
        let before = self.base.base_length();
        let acc = self.base.partial_fold(init, fold_op, limit);
        let used = before.saturating_sub(self.base.base_length());
        self.counter.fetch_add(used, Ordering::Relaxed);
        acc
    }
}

/// Overrides the scheduler or block schedule of a pipeline.
pub struct Scheduled<I> {
    base: I,
    schedule: Schedule,
}

impl<I> Scheduled<I> {
    pub(super) fn new(base: I, schedule: Schedule) -> Self {
        Scheduled { base, schedule }
    }
}

impl<I: ParallelIterator> ParallelIterator for Scheduled<I> {
    type Item = I::Item;
    type Producer = I::Producer;

    fn into_producer(self) -> I::Producer {
        self.base.into_producer()
    }

    fn schedule(&self) -> Schedule {
        self.schedule
    }
}

impl<I: IndexedParallelIterator> IndexedParallelIterator for Scheduled<I> {
    fn len(&self) -> usize {
        self.base.len()
    }
}

/// Applies a splitting policy to a pipeline.
pub struct Policy<I, S> {
    base: I,
    state: S,
}

impl<I, S> Policy<I, S> {
    pub(super) fn new(base: I, state: S) -> Self {
        Policy { base, state }
    }
}

impl<I: ParallelIterator, S: SplitPolicy> ParallelIterator for Policy<I, S> {
    type Item = I::Item;
    type Producer = PolicyProducer<I::Producer, S>;

    fn into_producer(self) -> Self::Producer {
        let mut state = self.state;
        state.start();
        PolicyProducer::new(self.base.into_producer(), state)
    }

    fn schedule(&self) -> Schedule {
        self.base.schedule()
    }
}

impl<I: IndexedParallelIterator, S: SplitPolicy> IndexedParallelIterator for Policy<I, S> {
    fn len(&self) -> usize {
        self.base.len()
    }
}
