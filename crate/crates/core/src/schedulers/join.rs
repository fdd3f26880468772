use crate::divisible::Producer;
use crate::reducer::Reducer;
use crate::runtime;
use crate::trace::{self, labels};

pub(crate) fn join_node<P, R>(producer: P, reducer: &R, offset: usize) -> R::Acc
where
    P: Producer,
    R: Reducer<P::Item>,
{
    if runtime::is_cancelled() || reducer.should_stop(offset) {
        return reducer.identity();
    }
    if !producer.should_be_divided() {
        let _span = trace::span(labels::LEAF);
        return reducer.leaf_fold(producer, offset);
    }
    let (left, right) = producer.divide();
    runtime::note_split();
    let right_offset = offset + left.base_length();
    let parent = trace::current_task();
    let (a, b) = runtime::join(
        || child(left, reducer, offset, parent),
        || child(right, reducer, right_offset, parent),
    );
    let _span = trace::span(labels::COMBINE);
    reducer.combine(a, b)
}

fn child<P, R>(producer: P, reducer: &R, offset: usize, parent: Option<u64>) -> R::Acc
where
    P: Producer,
    R: Reducer<P::Item>,
{
    runtime::note_task();
    let _task = trace::enter_task_with_parent(parent);
    join_node(producer, reducer, offset)
}
