//! A small fork-join work-stealing runtime.
//!
//! Each worker owns a LIFO deque. `join` pushes its right closure on the
//! local deque and runs the left one immediately; thieves take the oldest
//! job of a randomly chosen victim. A worker blocked on a join keeps
//! stealing until its right closure has completed.
//!
//! Workers that find no work register themselves in a shared idle counter;
//! [`steal_requests_pending`] reads that counter and is what the adaptive
//! scheduler uses to decide when to divide.

mod job;
mod latch;
mod registry;

use std::cell::RefCell;
use std::sync::atomic::Ordering;
use std::sync::{Arc, Weak};
use std::thread::JoinHandle;

pub(crate) use job::{Job, JobRef, JobResult};
pub(crate) use latch::{Latch, SpinLatch};
pub(crate) use registry::{Registry, WorkerThread};

use job::StackJob;

use crate::trace::ExecutionSpan;

/// Environment variable overriding the default worker count.
pub const THREADS_ENV: &str = "SPLITKIT_THREADS";

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RuntimeError {
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error("a runtime is already installed in this scope")]
    AlreadyInstalled,
    #[error("invalid {THREADS_ENV} value {0:?}")]
    InvalidEnv(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuntimeConfig {
    pub worker_count: usize,
    /// Bind worker `i` to core `i mod cores` (Linux only, best effort).
    pub pin_workers: bool,
    /// Record execution spans (see [`crate::trace`]).
    pub record_spans: bool,
}

impl RuntimeConfig {
    pub fn new(worker_count: usize) -> Self {
        RuntimeConfig {
            worker_count,
            pin_workers: false,
            record_spans: false,
        }
    }

    /// Worker count from `SPLITKIT_THREADS`, falling back to the number of
    /// available cores.
    pub fn from_env() -> Result<Self, RuntimeError> {
        let workers = match std::env::var(THREADS_ENV) {
            Ok(value) => value
                .trim()
                .parse::<usize>()
                .map_err(|_| RuntimeError::InvalidEnv(value.clone()))?,
            Err(_) => std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1),
        };
        Ok(RuntimeConfig::new(workers))
    }

    pub fn pin_workers(mut self, pin: bool) -> Self {
        self.pin_workers = pin;
        self
    }

    pub fn record_spans(mut self, record: bool) -> Self {
        self.record_spans = record;
        self
    }
}

/// Instrumentation counters, monotonic since the last reset.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RuntimeStats {
    /// Jobs taken from another worker's deque that brought work with them.
    pub steals: u64,
    /// Producer divisions performed by the schedulers.
    pub splits: u64,
    /// Tasks created by the schedulers (root tasks included).
    pub tasks: u64,
    /// Micro-loop iterations of the adaptive scheduler.
    pub micro_loops: u64,
}

/// Information handed to each side of [`join_context`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskContext {
    pub worker_id: usize,
    /// True iff the closure runs on a different worker than the one that
    /// created it, i.e. it was stolen.
    pub migrated: bool,
}

thread_local! {
    static INSTALLED: RefCell<Option<Weak<Registry>>> = const { RefCell::new(None) };
}

fn installed_registry() -> Option<Arc<Registry>> {
    INSTALLED.with(|slot| slot.borrow().as_ref().and_then(Weak::upgrade))
}

/// The running worker pool. Dropping it stops the workers once their
/// queues are drained.
pub struct Runtime {
    registry: Arc<Registry>,
    threads: Vec<JoinHandle<()>>,
}

impl Runtime {
    /// Starts a pool and makes it the target of parallel calls issued from
    /// the current thread until the handle is dropped.
    pub fn install(config: RuntimeConfig) -> Result<Runtime, RuntimeError> {
        if config.worker_count == 0 {
            return Err(RuntimeError::NoWorkers);
        }
        if WorkerThread::current().is_some() || installed_registry().is_some() {
            return Err(RuntimeError::AlreadyInstalled);
        }
        let (registry, deques) = Registry::new(config.worker_count, config.record_spans);
        let threads = deques
            .into_iter()
            .enumerate()
            .map(|(index, deque)| registry.spawn_worker(index, deque, config.pin_workers))
            .collect();
        INSTALLED.with(|slot| *slot.borrow_mut() = Some(Arc::downgrade(&registry)));
        Ok(Runtime { registry, threads })
    }

    pub fn worker_count(&self) -> usize {
        self.registry.worker_count()
    }

    /// Runs `f` inside the pool and returns its result.
    pub fn run<F, R>(&self, f: F) -> R
    where
        F: FnOnce() -> R + Send,
        R: Send,
    {
        match WorkerThread::current() {
            Some(worker) if Arc::ptr_eq(worker.registry(), &self.registry) => f(),
            _ => self.registry.run(f),
        }
    }

    pub fn stats(&self) -> RuntimeStats {
        self.registry.counters.snapshot()
    }

    pub fn reset_stats(&self) {
        self.registry.counters.reset();
    }

    /// Drains the recorded spans, sorted by start time.
    pub fn take_spans(&self) -> Vec<ExecutionSpan> {
        self.registry.take_spans()
    }
}

impl Drop for Runtime {
    fn drop(&mut self) {
        INSTALLED.with(|slot| {
            let mut slot = slot.borrow_mut();
            if slot
                .as_ref()
                .is_some_and(|weak| std::ptr::eq(weak.as_ptr(), Arc::as_ptr(&self.registry)))
            {
                *slot = None;
            }
        });
        self.registry.terminate();
        for thread in self.threads.drain(..) {
            let _ = thread.join();
        }
    }
}

/// Runs `f` on a worker: directly when already on one, through the runtime
/// installed by this thread otherwise, and inline as a last resort (no pool
/// means sequential execution).
pub(crate) fn in_worker<F, R>(f: F) -> R
where
    F: FnOnce() -> R + Send,
    R: Send,
{
    if WorkerThread::current().is_some() {
        return f();
    }
    match installed_registry() {
        Some(registry) => registry.run(f),
        None => f(),
    }
}

/// Runs both closures, potentially in parallel, and returns both results.
pub fn join<A, B, RA, RB>(left: A, right: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    join_context(|_| left(), |_| right())
}

/// Like [`join`], but each closure learns whether it was stolen.
pub fn join_context<A, B, RA, RB>(left: A, right: B) -> (RA, RB)
where
    A: FnOnce(TaskContext) -> RA + Send,
    B: FnOnce(TaskContext) -> RB + Send,
    RA: Send,
    RB: Send,
{
    if let Some(worker) = WorkerThread::current() {
        return join_on_worker(worker, left, right);
    }
    match installed_registry() {
        Some(registry) => registry.run(move || join_context(left, right)),
        None => {
            let context = TaskContext {
                worker_id: 0,
                migrated: false,
            };
            (left(context), right(context))
        }
    }
}

fn join_on_worker<A, B, RA, RB>(worker: &WorkerThread, left: A, right: B) -> (RA, RB)
where
    A: FnOnce(TaskContext) -> RA + Send,
    B: FnOnce(TaskContext) -> RB + Send,
    RA: Send,
    RB: Send,
{
    let index = worker.index();
    if worker.in_nano_loop() {
        let context = TaskContext {
            worker_id: index,
            migrated: false,
        };
        return (left(context), right(context));
    }
    let job_b = StackJob::new(SpinLatch::new(), Some(index), move |migrated| {
        let worker_id = WorkerThread::current().map_or(index, |w| w.index());
        right(TaskContext {
            worker_id,
            migrated,
        })
    });
    let job_b_ref = job_b.as_job_ref();
    worker.push(job_b_ref);

    let result_a = JobResult::call(|| {
        left(TaskContext {
            worker_id: index,
            migrated: false,
        })
    });
    if matches!(result_a, JobResult::Panic(_)) {
        worker.registry().cancel();
    }

    let mut inline_b = None;
    while !job_b.latch.probe() {
        match worker.pop() {
            Some(job) if job == job_b_ref => {
                inline_b = Some(JobResult::call(|| unsafe { job_b.run_inline(false) }));
                break;
            }
            Some(job) => unsafe { job.execute() },
            None => {
                worker.wait_until(&job_b.latch);
                break;
            }
        }
    }
    // `inline_b` is set only when the job was moved out and run here.
    let result_b = match inline_b {
        Some(result) => result,
        None => job_b.into_result(),
    };
    (result_a.into_value(), result_b.into_value())
}

/// True iff at least one worker is currently hunting for work. Always false
/// outside a pool or with a single worker.
#[inline]
pub fn steal_requests_pending() -> bool {
    WorkerThread::current().is_some_and(|w| !w.in_nano_loop() && w.registry().idle_workers() > 0)
}

/// Index of the worker running the caller, `None` outside a pool.
#[inline]
pub fn current_worker_index() -> Option<usize> {
    WorkerThread::current().map(|w| w.index())
}

/// Number of workers of the pool the caller runs in (or would run in).
pub fn current_num_workers() -> usize {
    if let Some(worker) = WorkerThread::current() {
        return worker.registry().worker_count();
    }
    installed_registry().map_or(1, |r| r.worker_count())
}

/// Counters of the pool the caller runs in (or would run in).
pub fn stats() -> Option<RuntimeStats> {
    current_registry().map(|r| r.counters.snapshot())
}

pub fn steal_count() -> u64 {
    stats().map_or(0, |s| s.steals)
}

pub fn split_count() -> u64 {
    stats().map_or(0, |s| s.splits)
}

pub fn reset_stats() {
    if let Some(registry) = current_registry() {
        registry.counters.reset();
    }
}

fn current_registry() -> Option<Arc<Registry>> {
    match WorkerThread::current() {
        Some(worker) => Some(Arc::clone(worker.registry())),
        None => installed_registry(),
    }
}

/// True once a task of the current run has panicked; schedulers stop
/// dividing and folding at their next decision point.
#[inline]
pub fn is_cancelled() -> bool {
    WorkerThread::current().is_some_and(|w| w.registry().is_cancelled())
}

#[inline]
pub(crate) fn note_split() {
    if let Some(worker) = WorkerThread::current() {
        worker
            .registry()
            .counters
            .splits
            .fetch_add(1, Ordering::Relaxed);
    }
}

#[inline]
pub(crate) fn note_task() {
    if let Some(worker) = WorkerThread::current() {
        worker
            .registry()
            .counters
            .tasks
            .fetch_add(1, Ordering::Relaxed);
    }
}

/// Takes back a steal that brought no work.
pub(crate) fn note_empty_steal() {
    if let Some(worker) = WorkerThread::current() {
        worker
            .registry()
            .counters
            .steals
            .fetch_sub(1, Ordering::Relaxed);
    }
}

#[inline]
pub(crate) fn note_micro_loop() {
    if let Some(worker) = WorkerThread::current() {
        worker
            .registry()
            .counters
            .micro_loops
            .fetch_add(1, Ordering::Relaxed);
    }
}
