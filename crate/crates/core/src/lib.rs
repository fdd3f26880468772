//! Parallel iterators whose task division is decided by composable,
//! user-space splitting policies and a choice of schedulers.
//!
//! A pipeline starts from a source ([`IntoParallelIterator`],
//! [`ParallelSlice::par_iter`], [`wrap_iter`], [`work`]), goes through
//! adaptors and policies, and ends with a terminal operation that runs on
//! the worker pool of the current [`Runtime`].
//!
//! ```
//! use splitkit::prelude::*;
//!
//! let total: u64 = (0u64..1000).into_par_iter().thief_splitting().map(|x| x * 2).sum();
//! assert_eq!(total, 999_000);
//! ```

pub mod algorithms;
pub mod divisible;
pub mod iter;
pub mod policy;
pub mod reducer;
pub mod runtime;
pub mod schedulers;
pub mod trace;

pub use divisible::{fuse_slices, fuse_slices_mut, Divisible, Producer};
pub use iter::{
    work, wrap_iter, IndexedParallelIterator, IntoParallelIterator, LengthMismatch,
    ParallelIterator, ParallelSlice, ParallelSliceMut,
};
pub use policy::{PolicyKind, PolicyParseError, SplitPolicy};
pub use reducer::Reducer;
pub use runtime::{
    join, join_context, steal_requests_pending, Runtime, RuntimeConfig, RuntimeError, RuntimeStats,
    TaskContext,
};
pub use schedulers::{AdaptiveConfig, BlockSchedule, Schedule, Scheduler};
pub use trace::ExecutionSpan;

pub mod prelude {
    pub use crate::divisible::{Divisible, Producer};
    pub use crate::iter::{
        work, wrap_iter, IndexedParallelIterator, IntoParallelIterator, ParallelIterator,
        ParallelSlice, ParallelSliceMut,
    };
    pub use crate::runtime::{join, join_context, Runtime, RuntimeConfig};
    pub use crate::schedulers::{AdaptiveConfig, BlockSchedule, Scheduler};
}
