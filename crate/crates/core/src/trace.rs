//! Execution spans: one contiguous piece of work by one worker.
//!
//! Recording is off unless the runtime was installed with
//! `record_spans(true)`. Spans are kept per worker while the pool runs and
//! merged by [`crate::Runtime::take_spans`]. When a span opens while another
//! one is open on the same worker (nested parallelism inside a combine, a
//! stolen job executed while waiting on a join), the outer span is cut so
//! that spans of a single worker never overlap.

use serde::{Deserialize, Serialize};

use crate::runtime::WorkerThread;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionSpan {
    pub task_id: u64,
    pub parent_id: Option<u64>,
    pub worker_id: usize,
    pub start_ns: u64,
    pub end_ns: u64,
    pub label: String,
}

/// Span labels emitted by the schedulers.
pub mod labels {
    pub const LEAF: &str = "leaf-fold";
    pub const COMBINE: &str = "combine";
    pub const NANO_LOOP: &str = "nano-loop";
    /// Zero-length marker emitted when a block of a block schedule starts.
    pub const BLOCK: &str = "block";
}

struct OpenSpan {
    label: &'static str,
    task: u64,
    parent: Option<u64>,
    start: u64,
}

#[derive(Default)]
pub(crate) struct SpanRecorder {
    task: Option<(u64, Option<u64>)>,
    open: Vec<OpenSpan>,
}

fn tracing_worker() -> Option<&'static WorkerThread> {
    WorkerThread::current().filter(|w| w.registry().tracing())
}

/// Restores the enclosing task when dropped.
pub(crate) struct TaskGuard {
    previous: Option<(u64, Option<u64>)>,
}

impl Drop for TaskGuard {
    fn drop(&mut self) {
        if let Some(worker) = tracing_worker() {
            worker.recorder.borrow_mut().task = self.previous;
        }
    }
}

/// Starts a new task whose parent is the current one.
pub(crate) fn enter_task() -> Option<TaskGuard> {
    let worker = tracing_worker()?;
    let id = worker.registry().new_task_id();
    let mut recorder = worker.recorder.borrow_mut();
    let previous = recorder.task;
    recorder.task = Some((id, previous.map(|(id, _)| id)));
    Some(TaskGuard { previous })
}

/// Starts a new task with an explicit parent, used by jobs that run on a
/// thief and therefore do not inherit the owner's task.
pub(crate) fn enter_task_with_parent(parent: Option<u64>) -> Option<TaskGuard> {
    let worker = tracing_worker()?;
    let id = worker.registry().new_task_id();
    let mut recorder = worker.recorder.borrow_mut();
    let previous = recorder.task;
    recorder.task = Some((id, parent));
    Some(TaskGuard { previous })
}

/// Makes `task` (as returned by [`task_frame`]) current until the guard
/// drops; used when a worker finishes work on behalf of another task.
pub(crate) fn resume_task(task: Option<(u64, Option<u64>)>) -> Option<TaskGuard> {
    let worker = tracing_worker()?;
    let mut recorder = worker.recorder.borrow_mut();
    let previous = recorder.task;
    recorder.task = task;
    Some(TaskGuard { previous })
}

pub(crate) fn task_frame() -> Option<(u64, Option<u64>)> {
    let worker = tracing_worker()?;
    let recorder = worker.recorder.borrow();
    recorder.task
}

pub(crate) fn current_task() -> Option<u64> {
    let worker = tracing_worker()?;
    let recorder = worker.recorder.borrow();
    recorder.task.map(|(id, _)| id)
}

pub(crate) struct SpanGuard {
    worker: &'static WorkerThread,
}

/// Opens a span on the current worker; it closes when the guard drops.
pub(crate) fn span(label: &'static str) -> Option<SpanGuard> {
    let worker = tracing_worker()?;
    let now = worker.registry().now_ns();
    let mut recorder = worker.recorder.borrow_mut();
    if let Some(outer) = recorder.open.last_mut() {
        emit(worker, outer, now);
    }
    let (task, parent) = recorder.task.unwrap_or((0, None));
    recorder.open.push(OpenSpan {
        label,
        task,
        parent,
        start: now,
    });
    Some(SpanGuard { worker })
}

impl Drop for SpanGuard {
    fn drop(&mut self) {
        let now = self.worker.registry().now_ns();
        let mut recorder = self.worker.recorder.borrow_mut();
        if let Some(span) = recorder.open.pop() {
            emit(self.worker, &span, now);
        }
        if let Some(outer) = recorder.open.last_mut() {
            outer.start = now;
        }
    }
}

/// Records a zero-length marker span.
pub(crate) fn marker(label: &'static str) {
    if let Some(worker) = tracing_worker() {
        let now = worker.registry().now_ns();
        let recorder = worker.recorder.borrow();
        let (task, parent) = recorder.task.unwrap_or((0, None));
        worker.registry().push_span(
            worker.index(),
            ExecutionSpan {
                task_id: task,
                parent_id: parent,
                worker_id: worker.index(),
                start_ns: now,
                end_ns: now,
                label: label.to_string(),
            },
        );
    }
}

fn emit(worker: &WorkerThread, span: &OpenSpan, end: u64) {
    // Segments shorter than a nanosecond carry no information.
    if end <= span.start {
        return;
    }
    worker.registry().push_span(
        worker.index(),
        ExecutionSpan {
            task_id: span.task,
            parent_id: span.parent,
            worker_id: worker.index(),
            start_ns: span.start,
            end_ns: end,
            label: span.label.to_string(),
        },
    );
}
