//! Worker threads, their deques, and the idle/steal bookkeeping shared
//! between them.

use std::cell::{Cell, RefCell};
use std::sync::atomic::{fence, AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use crossbeam_deque::{Injector, Steal, Stealer, Worker};

use super::job::{JobRef, StackJob};
use super::latch::{LockLatch, SpinLatch};
use super::RuntimeStats;
use crate::trace::{ExecutionSpan, SpanRecorder};

/// Failed hunting rounds before a waiting worker blocks on the condvar.
const SPIN_ROUNDS: u32 = 16;
const IDLE_SLEEP: Duration = Duration::from_millis(2);
const JOIN_SLEEP: Duration = Duration::from_micros(200);

#[derive(Default)]
pub(crate) struct Counters {
    pub(crate) steals: AtomicU64,
    pub(crate) splits: AtomicU64,
    pub(crate) tasks: AtomicU64,
    pub(crate) micro_loops: AtomicU64,
}

impl Counters {
    pub(crate) fn snapshot(&self) -> RuntimeStats {
        RuntimeStats {
            steals: self.steals.load(Ordering::SeqCst),
            splits: self.splits.load(Ordering::SeqCst),
            tasks: self.tasks.load(Ordering::SeqCst),
            micro_loops: self.micro_loops.load(Ordering::SeqCst),
        }
    }

    pub(crate) fn reset(&self) {
        self.steals.store(0, Ordering::SeqCst);
        self.splits.store(0, Ordering::SeqCst);
        self.tasks.store(0, Ordering::SeqCst);
        self.micro_loops.store(0, Ordering::SeqCst);
    }
}

struct Sleep {
    lock: Mutex<()>,
    cond: Condvar,
    sleepers: AtomicUsize,
}

pub(crate) struct Registry {
    stealers: Vec<Stealer<JobRef>>,
    injector: Injector<JobRef>,
    idle: AtomicUsize,
    sleep: Sleep,
    terminate: AtomicBool,
    cancelled: AtomicBool,
    pub(crate) counters: Counters,
    tracing: bool,
    spans: Vec<Mutex<Vec<ExecutionSpan>>>,
    next_task_id: AtomicU64,
    epoch: Instant,
}

impl Registry {
    pub(crate) fn new(worker_count: usize, tracing: bool) -> (Arc<Registry>, Vec<Worker<JobRef>>) {
        let deques: Vec<Worker<JobRef>> = (0..worker_count).map(|_| Worker::new_lifo()).collect();
        let registry = Registry {
            stealers: deques.iter().map(Worker::stealer).collect(),
            injector: Injector::new(),
            idle: AtomicUsize::new(0),
            sleep: Sleep {
                lock: Mutex::new(()),
                cond: Condvar::new(),
                sleepers: AtomicUsize::new(0),
            },
            terminate: AtomicBool::new(false),
            cancelled: AtomicBool::new(false),
            counters: Counters::default(),
            tracing,
            spans: (0..worker_count).map(|_| Mutex::new(Vec::new())).collect(),
            next_task_id: AtomicU64::new(0),
            epoch: Instant::now(),
        };
        (Arc::new(registry), deques)
    }

    pub(crate) fn worker_count(&self) -> usize {
        self.stealers.len()
    }

    #[inline]
    pub(crate) fn idle_workers(&self) -> usize {
        self.idle.load(Ordering::Relaxed)
    }

    pub(crate) fn tracing(&self) -> bool {
        self.tracing
    }

    pub(crate) fn now_ns(&self) -> u64 {
        self.epoch.elapsed().as_nanos() as u64
    }

    pub(crate) fn new_task_id(&self) -> u64 {
        self.next_task_id.fetch_add(1, Ordering::Relaxed)
    }

    pub(crate) fn push_span(&self, worker: usize, span: ExecutionSpan) {
        self.spans[worker].lock().unwrap().push(span);
    }

    pub(crate) fn take_spans(&self) -> Vec<ExecutionSpan> {
        let mut all: Vec<ExecutionSpan> = self
            .spans
            .iter()
            .flat_map(|buffer| std::mem::take(&mut *buffer.lock().unwrap()))
            .collect();
        all.sort_by_key(|s| (s.start_ns, s.worker_id, s.end_ns));
        all
    }

    pub(crate) fn cancel(&self) {
        self.cancelled.store(true, Ordering::Relaxed);
    }

    #[inline]
    pub(crate) fn is_cancelled(&self) -> bool {
        self.cancelled.load(Ordering::Relaxed)
    }

    pub(crate) fn terminate(&self) {
        self.terminate.store(true, Ordering::SeqCst);
        self.notify();
    }

    /// Wakes sleeping workers; cheap when nobody sleeps.
    pub(crate) fn notify(&self) {
        fence(Ordering::SeqCst);
        if self.sleep.sleepers.load(Ordering::SeqCst) > 0 {
            let _guard = self.sleep.lock.lock().unwrap();
            self.sleep.cond.notify_all();
        }
    }

    fn has_visible_work(&self) -> bool {
        !self.injector.is_empty() || self.stealers.iter().any(|s| !s.is_empty())
    }

    fn sleep(&self, ready: &dyn Fn() -> bool, timeout: Duration) {
        let guard = self.sleep.lock.lock().unwrap();
        self.sleep.sleepers.fetch_add(1, Ordering::SeqCst);
        if !ready() && !self.has_visible_work() && !self.terminate.load(Ordering::SeqCst) {
            let _ = self.sleep.cond.wait_timeout(guard, timeout).unwrap();
        }
        self.sleep.sleepers.fetch_sub(1, Ordering::SeqCst);
    }

    /// Runs `f` on a worker of this pool and blocks the calling (non-worker)
    /// thread until it completes.
    pub(crate) fn run<F, R>(self: &Arc<Self>, f: F) -> R
    where
        F: FnOnce() -> R + Send,
        R: Send,
    {
        self.cancelled.store(false, Ordering::Relaxed);
        let job = StackJob::new(LockLatch::new(), None, move |_| f());
        self.injector.push(job.as_job_ref());
        self.notify();
        job.latch.wait();
        job.into_result().into_value()
    }

    pub(crate) fn spawn_worker(
        self: &Arc<Self>,
        index: usize,
        deque: Worker<JobRef>,
        pin: bool,
    ) -> thread::JoinHandle<()> {
        let registry = Arc::clone(self);
        thread::Builder::new()
            .name(format!("splitkit-worker-{index}"))
            .spawn(move || {
                if pin {
                    pin_to_core(index);
                }
                let worker = WorkerThread {
                    index,
                    deque,
                    registry,
                    rng: Cell::new(
                        0x9E37_79B9_7F4A_7C15
                            ^ (index as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03),
                    ),
                    idle: Cell::new(false),
                    nano_depth: Cell::new(0),
                    recorder: RefCell::new(SpanRecorder::default()),
                };
                WORKER.with(|w| w.set(&worker as *const WorkerThread));
                worker.main_loop();
                worker.set_active();
                WORKER.with(|w| w.set(std::ptr::null()));
            })
            .expect("failed to spawn worker thread")
    }
}

thread_local! {
    static WORKER: Cell<*const WorkerThread> = const { Cell::new(std::ptr::null()) };
}

pub(crate) struct WorkerThread {
    index: usize,
    deque: Worker<JobRef>,
    registry: Arc<Registry>,
    rng: Cell<u64>,
    idle: Cell<bool>,
    nano_depth: Cell<u32>,
    pub(crate) recorder: RefCell<SpanRecorder>,
}

impl WorkerThread {
    /// The worker running on this thread, if any.
    #[inline]
    pub(crate) fn current() -> Option<&'static WorkerThread> {
        // The pointer is cleared before the worker is dropped, and the
        // worker never leaves its own thread.
        WORKER.with(|w| unsafe { w.get().as_ref() })
    }

    #[inline]
    pub(crate) fn index(&self) -> usize {
        self.index
    }

    #[inline]
    pub(crate) fn registry(&self) -> &Arc<Registry> {
        &self.registry
    }

    /// True while the worker runs a nano-loop body. Parallel calls made
    /// from there execute inline, so a worker never blocks while one of its
    /// offers is outstanding.
    #[inline]
    pub(crate) fn in_nano_loop(&self) -> bool {
        self.nano_depth.get() > 0
    }

    pub(crate) fn enter_nano_loop(&self) {
        self.nano_depth.set(self.nano_depth.get() + 1);
    }

    pub(crate) fn exit_nano_loop(&self) {
        self.nano_depth.set(self.nano_depth.get() - 1);
    }

    pub(crate) fn push(&self, job: JobRef) {
        self.deque.push(job);
        self.registry.notify();
    }

    pub(crate) fn pop(&self) -> Option<JobRef> {
        self.deque.pop()
    }

    fn next_random(&self) -> u64 {
        // xorshift64*
        let mut x = self.rng.get();
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.rng.set(x);
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    fn set_idle(&self) {
        if !self.idle.get() {
            self.idle.set(true);
            self.registry.idle.fetch_add(1, Ordering::SeqCst);
        }
    }

    fn set_active(&self) {
        if self.idle.get() {
            self.idle.set(false);
            self.registry.idle.fetch_sub(1, Ordering::SeqCst);
        }
    }

    fn steal(&self) -> Option<JobRef> {
        loop {
            match self.registry.injector.steal() {
                Steal::Success(job) => return Some(job),
                Steal::Empty => break,
                Steal::Retry => continue,
            }
        }
        let count = self.registry.stealers.len();
        if count <= 1 {
            return None;
        }
        let start = (self.next_random() % count as u64) as usize;
        for offset in 0..count {
            let victim = (start + offset) % count;
            if victim == self.index {
                continue;
            }
            loop {
                match self.registry.stealers[victim].steal() {
                    Steal::Success(job) => {
                        self.registry
                            .counters
                            .steals
                            .fetch_add(1, Ordering::Relaxed);
                        return Some(job);
                    }
                    Steal::Empty => break,
                    Steal::Retry => continue,
                }
            }
        }
        None
    }

    fn find_work(&self) -> Option<JobRef> {
        self.pop().or_else(|| self.steal())
    }

    fn main_loop(&self) {
        let mut failures = 0u32;
        loop {
            if let Some(job) = self.find_work() {
                self.set_active();
                failures = 0;
                unsafe { job.execute() };
                continue;
            }
            if self.registry.terminate.load(Ordering::SeqCst) {
                return;
            }
            self.set_idle();
            failures += 1;
            if failures < SPIN_ROUNDS {
                thread::yield_now();
            } else {
                self.registry.sleep(&|| false, IDLE_SLEEP);
            }
        }
    }

    /// Keeps executing other jobs (hunting for work when there is none)
    /// until `latch` is set.
    pub(crate) fn wait_until(&self, latch: &SpinLatch) {
        let mut failures = 0u32;
        while !latch.probe() {
            if let Some(job) = self.find_work() {
                self.set_active();
                failures = 0;
                unsafe { job.execute() };
                continue;
            }
            self.set_idle();
            failures += 1;
            if failures < SPIN_ROUNDS {
                thread::yield_now();
            } else {
                self.registry.sleep(&|| latch.probe(), JOIN_SLEEP);
            }
        }
        self.set_active();
    }
}

#[cfg(target_os = "linux")]
fn pin_to_core(index: usize) {
    let cores = thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    unsafe {
        let mut set: libc::cpu_set_t = std::mem::zeroed();
        libc::CPU_ZERO(&mut set);
        libc::CPU_SET(index % cores, &mut set);
        // Best effort: a refused affinity leaves the thread unpinned.
        let _ = libc::sched_setaffinity(0, std::mem::size_of::<libc::cpu_set_t>(), &set);
    }
}

#[cfg(not(target_os = "linux"))]
fn pin_to_core(_index: usize) {}
