//! Steal-driven adaptive scheduling.
//!
//! A task folds its producer in nano-loops whose budget doubles after each
//! micro-loop. When some worker is hunting for work, the task publishes an
//! offer job on its deque. A thief that steals the offer waits until the
//! owner reaches its next micro-loop boundary; the owner then divides the
//! remaining work in two and hands the right half over. An offer that is
//! still in the deque when the owner is about to finish is taken back, so
//! every task except the root starts with a successful steal.

use std::any::Any;
use std::cell::UnsafeCell;
use std::panic::{self, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, Ordering};

use super::AdaptiveConfig;
use crate::divisible::Producer;
use crate::reducer::Reducer;
use crate::runtime::{self, Job, JobRef, Latch, SpinLatch, WorkerThread};
use crate::trace::{self, labels};

struct Offer<P, R>
where
    P: Producer,
    R: Reducer<P::Item>,
{
    owner: usize,
    reducer: *const R,
    config: AdaptiveConfig,
    parent: Option<u64>,
    taken: AtomicBool,
    reclaimed: AtomicBool,
    part: UnsafeCell<Option<(P, usize)>>,
    served: SpinLatch,
    result: UnsafeCell<Option<std::thread::Result<R::Acc>>>,
    done: SpinLatch,
}

impl<P, R> Offer<P, R>
where
    P: Producer,
    R: Reducer<P::Item>,
{
    fn new(owner: usize, reducer: &R, config: AdaptiveConfig) -> Box<Self> {
        Box::new(Offer {
            owner,
            reducer,
            config,
            parent: trace::current_task(),
            taken: AtomicBool::new(false),
            reclaimed: AtomicBool::new(false),
            part: UnsafeCell::new(None),
            served: SpinLatch::new(),
            result: UnsafeCell::new(None),
            done: SpinLatch::new(),
        })
    }

    fn job_ref(&self) -> JobRef {
        // SAFETY: the owner keeps the boxed offer alive until it is either
        // retracted from its deque or its `done` latch is set.
        unsafe { JobRef::new(self) }
    }

    /// Takes the offer back if no thief has it.
    fn retract(&self, worker: &WorkerThread) -> bool {
        if self.reclaimed.load(Ordering::Acquire) {
            return true;
        }
        if self.taken.load(Ordering::Acquire) {
            return false;
        }
        // Only the owner pushes on its deque while an offer is outstanding,
        // so the offer is on top if it is still there.
        match worker.pop() {
            Some(job) if job == self.job_ref() => true,
            Some(other) => {
                worker.push(other);
                false
            }
            None => false,
        }
    }

    fn serve(&self, part: Option<(P, usize)>) {
        // SAFETY: the thief reads `part` only after `served` is set.
        unsafe { *self.part.get() = part };
        Latch::set(&self.served);
    }

    fn take_result(&self) -> std::thread::Result<R::Acc> {
        // SAFETY: called after `done` is set; the thief no longer touches
        // the offer.
        unsafe { (*self.result.get()).take().expect("offer result missing") }
    }
}

impl<P, R> Job for Offer<P, R>
where
    P: Producer,
    R: Reducer<P::Item>,
{
    unsafe fn execute(this: *const Self) {
        let offer = &*this;
        let worker = WorkerThread::current().expect("offers run on workers");
        if worker.index() == offer.owner {
            offer.reclaimed.store(true, Ordering::Release);
            return;
        }
        offer.taken.store(true, Ordering::Release);
        worker.wait_until(&offer.served);
        let reducer = &*offer.reducer;
        let result = match (*offer.part.get()).take() {
            None => {
                runtime::note_empty_steal();
                Ok(reducer.identity())
            }
            Some((producer, offset)) => {
                runtime::note_task();
                let _task = trace::enter_task_with_parent(offer.parent);
                panic::catch_unwind(AssertUnwindSafe(|| {
                    adaptive_task(producer, reducer, offer.config, offset)
                }))
            }
        };
        if result.is_err() {
            worker.registry().cancel();
        }
        *offer.result.get() = Some(result);
        Latch::set(&offer.done);
    }
}

pub(crate) fn adaptive_task<P, R>(
    mut producer: P,
    reducer: &R,
    config: AdaptiveConfig,
    mut offset: usize,
) -> R::Acc
where
    P: Producer,
    R: Reducer<P::Item>,
{
    let worker = WorkerThread::current();
    let initial = config.initial_block.max(1);
    let mut budget = initial;
    let mut acc = Some(reducer.identity());
    let mut outstanding: Option<Box<Offer<P, R>>> = None;
    let mut served: Vec<Box<Offer<P, R>>> = Vec::new();
    let mut started = false;
    let mut failure: Option<Box<dyn Any + Send>> = None;

    loop {
        let remaining = producer.base_length();
        let stop = (started && remaining == 0)
            || runtime::is_cancelled()
            || reducer.is_done(acc.as_ref().expect("accumulator present"))
            || reducer.should_stop(offset);

        if let (Some(offer), Some(worker)) = (outstanding.take(), worker) {
            let last = stop || budget >= remaining;
            if offer.taken.load(Ordering::Acquire) || last {
                if !offer.retract(worker) {
                    let part = if !stop && producer.should_be_divided() {
                        let (left, right) = producer.divide();
                        runtime::note_split();
                        let right_offset = offset + left.base_length();
                        producer = left;
                        Some((right, right_offset))
                    } else {
                        None
                    };
                    let divided = part.is_some();
                    offer.serve(part);
                    served.push(offer);
                    if divided && config.reset_on_steal {
                        budget = initial;
                    }
                    continue;
                }
            } else {
                outstanding = Some(offer);
            }
        }
        if stop {
            break;
        }

        if let Some(worker) = worker {
            if outstanding.is_none()
                && remaining > budget
                && runtime::steal_requests_pending()
                && producer.should_be_divided()
            {
                let offer = Offer::new(worker.index(), reducer, config);
                worker.push(offer.job_ref());
                outstanding = Some(offer);
            }
        }

        runtime::note_micro_loop();
        started = true;
        let folded = {
            let _span = trace::span(labels::NANO_LOOP);
            let current = acc.take().expect("accumulator present");
            if let Some(worker) = worker {
                worker.enter_nano_loop();
            }
            let folded = panic::catch_unwind(AssertUnwindSafe(|| {
                reducer.fold_chunk(current, &mut producer, budget, offset)
            }));
            if let Some(worker) = worker {
                worker.exit_nano_loop();
            }
            folded
        };
        match folded {
            Ok(next) => acc = Some(next),
            Err(payload) => {
                if let Some(worker) = worker {
                    worker.registry().cancel();
                }
                failure = Some(payload);
                break;
            }
        }
        offset += remaining.saturating_sub(producer.base_length());
        budget = config.next_budget(budget);
    }

    if let (Some(offer), Some(worker)) = (outstanding.take(), worker) {
        if !offer.retract(worker) {
            offer.serve(None);
            served.push(offer);
        }
    }
    if let Some(worker) = worker {
        for offer in served.iter().rev() {
            worker.wait_until(&offer.done);
        }
    }
    for offer in served.iter().rev() {
        match offer.take_result() {
            Ok(right) => {
                if let Some(left) = acc.take() {
                    let _span = trace::span(labels::COMBINE);
                    acc = Some(reducer.combine(left, right));
                }
            }
            Err(payload) => {
                failure.get_or_insert(payload);
            }
        }
    }
    if let Some(payload) = failure {
        panic::resume_unwind(payload);
    }
    acc.expect("accumulator present")
}
