use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Condvar, Mutex};

use super::registry::WorkerThread;

pub(crate) trait Latch {
    /// Marks the latch as set. The latch may be deallocated by a waiter as
    /// soon as this returns, so implementations touch nothing afterwards.
    fn set(this: *const Self);
}

/// Latch probed by a worker that keeps stealing while it waits.
#[derive(Default)]
pub(crate) struct SpinLatch {
    set: AtomicBool,
}

impl SpinLatch {
    pub(crate) fn new() -> Self {
        SpinLatch {
            set: AtomicBool::new(false),
        }
    }

    #[inline]
    pub(crate) fn probe(&self) -> bool {
        self.set.load(Ordering::Acquire)
    }
}

impl Latch for SpinLatch {
    fn set(this: *const Self) {
        // Grab the registry before publishing: once set, `this` may dangle.
        let worker = WorkerThread::current();
        unsafe { (*this).set.store(true, Ordering::Release) };
        if let Some(worker) = worker {
            worker.registry().notify();
        }
    }
}

/// Latch for threads outside the pool, which block on a condition variable.
pub(crate) struct LockLatch {
    done: Mutex<bool>,
    cond: Condvar,
}

impl LockLatch {
    pub(crate) fn new() -> Self {
        LockLatch {
            done: Mutex::new(false),
            cond: Condvar::new(),
        }
    }

    pub(crate) fn wait(&self) {
        let mut done = self.done.lock().unwrap();
        while !*done {
            done = self.cond.wait(done).unwrap();
        }
    }
}

impl Latch for LockLatch {
    fn set(this: *const Self) {
        let this = unsafe { &*this };
        let mut done = this.done.lock().unwrap();
        *done = true;
        // Notify while holding the lock: the waiter cannot return and free
        // the latch before we release it.
        this.cond.notify_all();
    }
}
