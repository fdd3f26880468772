//! Lazy parallel iterators.
//!
//! A [`ParallelIterator`] only describes a pipeline. Terminal operations
//! turn it into a [`Producer`] on a worker and hand that producer, with a
//! [`Reducer`], to the scheduler selected by the pipeline's [`Schedule`].

mod adaptors;
mod merge;
mod sources;

use std::iter::Sum;
use std::sync::atomic::AtomicUsize;
use std::sync::Arc;

pub use adaptors::{
    Copied, CopiedProducer, CountConsumed, CountProducer, Filter, FilterProducer, Fold,
    FoldProducer, Map, MapProducer, Policy, Scheduled, Zip, ZipProducer,
};
pub(crate) use merge::{co_rank, split_point};
pub use merge::{MergeIter, MergeProducer};
pub use sources::{
    work, wrap_iter, IntoParallelIterator, ParallelSlice, ParallelSliceMut, RangeIter, SliceIter,
    SliceIterMut, WorkIter, WorkProducer, WrapIter, Wrapped,
};

use crate::divisible::Producer;
use crate::policy::{
    BoundDepth, Cap, CapGauge, EvenLevels, ForceDepth, JoinContextPolicy, PolicyKind, PolicyStack,
    SizeLimit, ThiefSplitting,
};
use crate::reducer::{
    AllReducer, CollectReducer, CountReducer, FindFirstReducer, ForEachReducer, ReduceReducer,
    ReduceWithReducer, Reducer, SumReducer,
};
use crate::schedulers::{self, AdaptiveConfig, BlockSchedule, Schedule, Scheduler};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("cannot zip sources of lengths {left} and {right}")]
pub struct LengthMismatch {
    pub left: usize,
    pub right: usize,
}

pub trait ParallelIterator: Sized + Send {
    type Item;
    type Producer: Producer<Item = Self::Item>;

    /// Builds the executable producer. Called once, on the worker that runs
    /// the root task.
    fn into_producer(self) -> Self::Producer;

    /// Scheduler and block schedule selected by the pipeline.
    fn schedule(&self) -> Schedule {
        Schedule::default()
    }

    fn map<F, U>(self, f: F) -> Map<Self, F>
    where
        F: Fn(Self::Item) -> U + Sync + Send,
    {
        Map::new(self, f)
    }

    fn filter<F>(self, pred: F) -> Filter<Self, F>
    where
        F: Fn(&Self::Item) -> bool + Sync + Send,
    {
        Filter::new(self, pred)
    }

    /// Folds each sequential chunk into its own accumulator; the resulting
    /// iterator yields those accumulators in order.
    fn fold<ID, F, U>(self, identity: ID, fold_op: F) -> Fold<Self, ID, F>
    where
        ID: Fn() -> U + Sync + Send,
        F: Fn(U, Self::Item) -> U + Sync + Send,
    {
        Fold::new(self, identity, fold_op)
    }

    fn copied<'a, T>(self) -> Copied<Self>
    where
        Self: ParallelIterator<Item = &'a T>,
        T: Copy + 'a,
    {
        Copied::new(self)
    }

    /// Adds the number of base items pulled through this point to `counter`.
    fn count_consumed(self, counter: &AtomicUsize) -> CountConsumed<'_, Self> {
        CountConsumed::new(self, counter)
    }

    fn bound_depth(self, limit: usize) -> Policy<Self, BoundDepth> {
        Policy::new(self, BoundDepth::new(limit))
    }

    fn force_depth(self, depth: usize) -> Policy<Self, ForceDepth> {
        Policy::new(self, ForceDepth::new(depth))
    }

    fn size_limit(self, threshold: usize) -> Policy<Self, SizeLimit> {
        Policy::new(self, SizeLimit::new(threshold))
    }

    fn even_levels(self) -> Policy<Self, EvenLevels> {
        Policy::new(self, EvenLevels::new())
    }

    fn cap(self, threshold: usize) -> Policy<Self, Cap> {
        Policy::new(self, Cap::new(threshold))
    }

    /// Like [`cap`](Self::cap) with a caller-owned gauge, to observe the
    /// number of live tasks.
    fn cap_gauged(self, gauge: Arc<CapGauge>) -> Policy<Self, Cap> {
        Policy::new(self, Cap::with_gauge(gauge))
    }

    fn join_context_policy(self, limit: usize) -> Policy<Self, JoinContextPolicy> {
        Policy::new(self, JoinContextPolicy::new(limit))
    }

    /// Thief splitting with the default initial counter `⌈log2 p⌉ + 1`.
    fn thief_splitting(self) -> Policy<Self, ThiefSplitting> {
        Policy::new(self, ThiefSplitting::new(None))
    }

    fn thief_splitting_with(self, initial_counter: usize) -> Policy<Self, ThiefSplitting> {
        Policy::new(self, ThiefSplitting::new(Some(initial_counter)))
    }

    /// Applies policies chosen at run time, first one innermost.
    fn with_policies(self, kinds: &[PolicyKind]) -> Policy<Self, PolicyStack> {
        Policy::new(self, PolicyStack::new(kinds))
    }

    fn with_scheduler(self, scheduler: Scheduler) -> Scheduled<Self> {
        let schedule = Schedule {
            scheduler,
            ..self.schedule()
        };
        Scheduled::new(self, schedule)
    }

    /// Replaces both the scheduler and the block schedule.
    fn with_schedule(self, schedule: Schedule) -> Scheduled<Self> {
        Scheduled::new(self, schedule)
    }

    fn adaptive(self) -> Scheduled<Self> {
        self.with_scheduler(Scheduler::Adaptive(AdaptiveConfig::default()))
    }

    fn depjoin(self) -> Scheduled<Self> {
        self.with_scheduler(Scheduler::DepJoin)
    }

    /// Runs the pipeline over consecutive blocks of growing sizes.
    fn by_blocks(self, blocks: BlockSchedule) -> Scheduled<Self> {
        let schedule = Schedule {
            blocks: Some(blocks),
            ..self.schedule()
        };
        Scheduled::new(self, schedule)
    }

    /// Executes the pipeline with a custom reducer.
    fn drive<R>(self, reducer: R) -> R::Acc
    where
        R: Reducer<Self::Item> + Send,
    {
        schedulers::drive(self, reducer)
    }

    fn for_each<F>(self, f: F)
    where
        F: Fn(Self::Item) + Sync + Send,
    {
        self.drive(ForEachReducer::new(f))
    }

    fn reduce<ID, OP>(self, identity: ID, op: OP) -> Self::Item
    where
        Self::Item: Send,
        ID: Fn() -> Self::Item + Sync + Send,
        OP: Fn(Self::Item, Self::Item) -> Self::Item + Sync + Send,
    {
        self.drive(ReduceReducer::new(identity, op))
    }

    fn reduce_with<OP>(self, op: OP) -> Option<Self::Item>
    where
        Self::Item: Send,
        OP: Fn(Self::Item, Self::Item) -> Self::Item + Sync + Send,
    {
        self.drive(ReduceWithReducer::new(op))
    }

    fn sum<S>(self) -> S
    where
        S: Sum<Self::Item> + Sum<S> + Send,
    {
        self.drive(SumReducer::new())
    }

    fn count(self) -> usize {
        self.drive(CountReducer)
    }

    /// Collects in order; the result never depends on the division tree.
    fn collect<C>(self) -> C
    where
        Self::Item: Send,
        C: FromIterator<Self::Item>,
    {
        self.drive(CollectReducer).into_iter().flatten().collect()
    }

    /// The first item (in iteration order) satisfying `pred`.
    fn find_first<F>(self, pred: F) -> Option<Self::Item>
    where
        Self::Item: Send,
        F: Fn(&Self::Item) -> bool + Sync + Send,
    {
        self.drive(FindFirstReducer::new(pred))
    }

    fn all<F>(self, pred: F) -> bool
    where
        F: Fn(&Self::Item) -> bool + Sync + Send,
    {
        self.drive(AllReducer::new(pred))
    }

    fn any<F>(self, pred: F) -> bool
    where
        F: Fn(&Self::Item) -> bool + Sync + Send,
    {
        !self.all(move |item| !pred(item))
    }
}

/// Parallel iterators whose length is known before execution.
pub trait IndexedParallelIterator: ParallelIterator {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Pairs items of two equally long iterators.
    fn zip<J>(self, other: J) -> Result<Zip<Self, J>, LengthMismatch>
    where
        J: IndexedParallelIterator,
    {
        if self.len() != other.len() {
            return Err(LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(Zip::new(self, other))
    }
}
