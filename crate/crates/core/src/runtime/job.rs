//! Type-erased jobs living on the stack of the worker that spawned them.

use std::any::Any;
use std::cell::UnsafeCell;
use std::panic::{self, AssertUnwindSafe};

use super::latch::Latch;
use super::registry::WorkerThread;

pub(crate) trait Job {
    /// # Safety
    /// `this` must point to a live job that has not been executed yet.
    unsafe fn execute(this: *const Self);
}

/// A pointer to a job sitting in some deque. Copies compare equal when they
/// designate the same job.
#[derive(Clone, Copy, Debug)]
pub(crate) struct JobRef {
    pointer: *const (),
    execute_fn: unsafe fn(*const ()),
}

impl PartialEq for JobRef {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.pointer, other.pointer)
    }
}

impl Eq for JobRef {}

// The pointee is only touched by the single worker that pops or steals the
// reference, and its owner waits on a latch before releasing it.
unsafe impl Send for JobRef {}
unsafe impl Sync for JobRef {}

impl JobRef {
    /// # Safety
    /// The job must outlive every use of the returned reference.
    pub(crate) unsafe fn new<J: Job>(data: *const J) -> JobRef {
        unsafe fn execute_erased<J: Job>(this: *const ()) {
            J::execute(this as *const J)
        }
        JobRef {
            pointer: data as *const (),
            execute_fn: execute_erased::<J>,
        }
    }

    /// # Safety
    /// Must be called at most once per job, while the job is alive.
    pub(crate) unsafe fn execute(self) {
        (self.execute_fn)(self.pointer)
    }
}

pub(crate) enum JobResult<T> {
    Pending,
    Ok(T),
    Panic(Box<dyn Any + Send>),
}

impl<T> JobResult<T> {
    pub(crate) fn call(f: impl FnOnce() -> T) -> Self {
        match panic::catch_unwind(AssertUnwindSafe(f)) {
            Ok(value) => JobResult::Ok(value),
            Err(payload) => JobResult::Panic(payload),
        }
    }

    pub(crate) fn into_value(self) -> T {
        match self {
            JobResult::Ok(value) => value,
            JobResult::Panic(payload) => panic::resume_unwind(payload),
            JobResult::Pending => unreachable!("job result read before completion"),
        }
    }
}

/// A job whose closure receives `true` when it runs on a worker other than
/// the one recorded as its creator.
pub(crate) struct StackJob<L, F, R> {
    pub(crate) latch: L,
    creator: Option<usize>,
    func: UnsafeCell<Option<F>>,
    result: UnsafeCell<JobResult<R>>,
}

impl<L, F, R> StackJob<L, F, R>
where
    L: Latch,
    F: FnOnce(bool) -> R + Send,
    R: Send,
{
    pub(crate) fn new(latch: L, creator: Option<usize>, func: F) -> Self {
        StackJob {
            latch,
            creator,
            func: UnsafeCell::new(Some(func)),
            result: UnsafeCell::new(JobResult::Pending),
        }
    }

    pub(crate) fn as_job_ref(&self) -> JobRef {
        unsafe { JobRef::new(self) }
    }

    /// Runs the closure on the current thread, used when the owner pops the
    /// job back before anyone stole it.
    ///
    /// # Safety
    /// The caller must have reclaimed the only reference to this job.
    pub(crate) unsafe fn run_inline(&self, migrated: bool) -> R {
        let func = (*self.func.get()).take().expect("job already executed");
        func(migrated)
    }

    pub(crate) fn into_result(self) -> JobResult<R> {
        self.result.into_inner()
    }
}

impl<L, F, R> Job for StackJob<L, F, R>
where
    L: Latch,
    F: FnOnce(bool) -> R + Send,
    R: Send,
{
    unsafe fn execute(this: *const Self) {
        let this = &*this;
        let func = (*this.func.get()).take().expect("job already executed");
        let current = WorkerThread::current().map(|w| w.index());
        let migrated = match (this.creator, current) {
            (Some(creator), Some(current)) => creator != current,
            _ => false,
        };
        let result = JobResult::call(|| func(migrated));
        if matches!(result, JobResult::Panic(_)) {
            if let Some(worker) = WorkerThread::current() {
                worker.registry().cancel();
            }
        }
        *this.result.get() = result;
        // `this` may be freed as soon as the latch is set.
        Latch::set(&this.latch);
    }
}
