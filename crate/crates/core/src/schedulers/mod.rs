//! Drivers turning a producer and a reducer into a result.

mod adaptive;
mod blocks;
mod depjoin;
mod join;

use crate::divisible::Producer;
use crate::iter::ParallelIterator;
use crate::reducer::Reducer;
use crate::runtime;
use crate::trace;

/// Nano-loop budgets of the adaptive scheduler: `initial_block` units,
/// multiplied by `growth` after each micro-loop without a division.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveConfig {
    pub initial_block: usize,
    pub growth: f64,
    /// Restart from `initial_block` after each division.
    pub reset_on_steal: bool,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        AdaptiveConfig {
            initial_block: 1,
            growth: 2.0,
            reset_on_steal: true,
        }
    }
}

impl AdaptiveConfig {
    pub(crate) fn next_budget(&self, budget: usize) -> usize {
        let grown = (budget as f64 * self.growth).ceil();
        if grown >= usize::MAX as f64 {
            usize::MAX
        } else {
            (grown as usize).max(budget.saturating_add(1))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Scheduler {
    /// Recursive fork-join over the division tree.
    #[default]
    Join,
    /// Fork-join where the last finishing child runs the combine.
    DepJoin,
    /// Steal-driven division with geometrically growing nano-loops.
    Adaptive(AdaptiveConfig),
}

/// Sequence of consecutive blocks of growing sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockSchedule {
    /// Size of the first block; `None` uses the worker count.
    pub initial_size: Option<usize>,
    pub growth_factor: f64,
}

impl Default for BlockSchedule {
    fn default() -> Self {
        BlockSchedule {
            initial_size: None,
            growth_factor: 2.0,
        }
    }
}

impl BlockSchedule {
    pub fn new(initial_size: usize, growth_factor: f64) -> Self {
        BlockSchedule {
            initial_size: Some(initial_size),
            growth_factor,
        }
    }

    pub(crate) fn first_block(&self, workers: usize) -> usize {
        self.initial_size.unwrap_or(workers).max(1)
    }

    pub(crate) fn next_block(&self, size: usize) -> usize {
        let grown = (size as f64 * self.growth_factor).ceil();
        if grown >= usize::MAX as f64 {
            usize::MAX
        } else {
            (grown as usize).max(size.saturating_add(1))
        }
    }

    /// Block sizes for an input of `length` elements, the last one
    /// truncated to the remainder.
    pub fn sizes(&self, length: usize, workers: usize) -> Vec<usize> {
        let mut sizes = Vec::new();
        let mut left = length;
        let mut size = self.first_block(workers);
        while left > 0 {
            let block = size.min(left);
            sizes.push(block);
            left -= block;
            size = self.next_block(size);
        }
        sizes
    }
}

/// Scheduler selection carried by a pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Schedule {
    pub scheduler: Scheduler,
    pub blocks: Option<BlockSchedule>,
}

pub(crate) fn drive<I, R>(iter: I, reducer: R) -> R::Acc
where
    I: ParallelIterator,
    R: Reducer<I::Item> + Send,
{
    let schedule = iter.schedule();
    runtime::in_worker(move || {
        let producer = iter.into_producer();
        run(producer, &reducer, schedule)
    })
}

/// Runs `producer` with the given schedule on the current thread.
pub fn run<P, R>(producer: P, reducer: &R, schedule: Schedule) -> R::Acc
where
    P: Producer,
    R: Reducer<P::Item>,
{
    match schedule.blocks {
        Some(blocks) => blocks::run_blocks(producer, reducer, blocks, schedule.scheduler),
        None => run_root(producer, reducer, schedule.scheduler, 0),
    }
}

/// Runs one root task starting at base position `offset`.
pub(crate) fn run_root<P, R>(
    producer: P,
    reducer: &R,
    scheduler: Scheduler,
    offset: usize,
) -> R::Acc
where
    P: Producer,
    R: Reducer<P::Item>,
{
    runtime::note_task();
    let _task = trace::enter_task();
    match scheduler {
        Scheduler::Join => join::join_node(producer, reducer, offset),
        Scheduler::DepJoin => depjoin::depjoin_root(producer, reducer, offset),
        Scheduler::Adaptive(config) => adaptive::adaptive_task(producer, reducer, config, offset),
    }
}

/// Recursive fork-join: divide while the producer asks for it, fold the
/// leaves, combine on the way back up.
pub fn schedule_join<P, R>(producer: P, reducer: &R) -> R::Acc
where
    P: Producer,
    R: Reducer<P::Item>,
{
    runtime::in_worker(|| run_root(producer, reducer, Scheduler::Join, 0))
}

/// Same tree as [`schedule_join`], but each combine is executed by the
/// child that finishes last, without waiting at the join point.
pub fn schedule_depjoin<P, R>(producer: P, reducer: &R) -> R::Acc
where
    P: Producer,
    R: Reducer<P::Item>,
{
    runtime::in_worker(|| run_root(producer, reducer, Scheduler::DepJoin, 0))
}

/// Sequential nano-loops of growing size; the remaining work is divided in
/// two only when another worker is looking for work.
pub fn schedule_adaptive<P, R>(producer: P, reducer: &R, config: AdaptiveConfig) -> R::Acc
where
    P: Producer,
    R: Reducer<P::Item>,
{
    runtime::in_worker(|| run_root(producer, reducer, Scheduler::Adaptive(config), 0))
}

/// Consecutive blocks of growing size, each run in parallel with `inner`,
/// stopping early once the reducer knows the result.
pub fn schedule_blocks<P, R>(
    producer: P,
    reducer: &R,
    schedule: BlockSchedule,
    inner: Scheduler,
) -> R::Acc
where
    P: Producer,
    R: Reducer<P::Item>,
{
    runtime::in_worker(|| blocks::run_blocks(producer, reducer, schedule, inner))
}
