//! Consecutive blocks of geometrically growing size.

use super::{run_root, BlockSchedule, Scheduler};
use crate::divisible::Producer;
use crate::reducer::Reducer;
use crate::runtime;
use crate::trace::{self, labels};

pub(crate) fn run_blocks<P, R>(
    producer: P,
    reducer: &R,
    schedule: BlockSchedule,
    inner: Scheduler,
) -> R::Acc
where
    P: Producer,
    R: Reducer<P::Item>,
{
    let mut acc = reducer.identity();
    let mut rest = producer;
    let mut offset = 0;
    let mut size = schedule.first_block(runtime::current_num_workers());
    loop {
        trace::marker(labels::BLOCK);
        let (block, tail) = rest.cut_at(size);
        let length = block.base_length();
        let result = run_root(block, reducer, inner, offset);
        acc = {
            let _span = trace::span(labels::COMBINE);
            reducer.combine(acc, result)
        };
        offset += length;
        rest = tail;
        if rest.base_length() == 0
            || reducer.is_done(&acc)
            || reducer.should_stop(offset)
            || runtime::is_cancelled()
        {
            return acc;
        }
        size = schedule.next_block(size);
    }
}
