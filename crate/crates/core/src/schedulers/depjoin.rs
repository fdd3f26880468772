use std::sync::Mutex;

use crate::divisible::Producer;
use crate::reducer::Reducer;
use crate::runtime;
use crate::trace::{self, labels};

type TaskFrame = Option<(u64, Option<u64>)>;

/// Meeting point of two sibling tasks: the first to finish parks its
/// result, the second combines both and carries on upwards.
struct Node<'a, A> {
    parked: Mutex<Option<A>>,
    up: Link<'a, A>,
    task: TaskFrame,
}

enum Link<'a, A> {
    Root(&'a Mutex<Option<A>>),
    Child { node: &'a Node<'a, A>, left: bool },
}

impl<A> Clone for Link<'_, A> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<A> Copy for Link<'_, A> {}

pub(crate) fn depjoin_root<P, R>(producer: P, reducer: &R, offset: usize) -> R::Acc
where
    P: Producer,
    R: Reducer<P::Item>,
{
    let root = Mutex::new(None);
    depjoin_node(producer, reducer, offset, Link::Root(&root));
    root.into_inner()
        .unwrap_or_else(|poisoned| poisoned.into_inner())
        .expect("depjoin finished without a result")
}

fn depjoin_node<P, R>(producer: P, reducer: &R, offset: usize, up: Link<'_, R::Acc>)
where
    P: Producer,
    R: Reducer<P::Item>,
{
    if runtime::is_cancelled() || reducer.should_stop(offset) {
        deliver(reducer, up, reducer.identity());
        return;
    }
    if !producer.should_be_divided() {
        let acc = {
            let _span = trace::span(labels::LEAF);
            reducer.leaf_fold(producer, offset)
        };
        deliver(reducer, up, acc);
        return;
    }
    let (left, right) = producer.divide();
    runtime::note_split();
    let right_offset = offset + left.base_length();
    let node = Node {
        parked: Mutex::new(None),
        up,
        task: trace::task_frame(),
    };
    let parent = trace::current_task();
    runtime::join(
        || {
            child(
                left,
                reducer,
                offset,
                Link::Child {
                    node: &node,
                    left: true,
                },
                parent,
            )
        },
        || {
            child(
                right,
                reducer,
                right_offset,
                Link::Child {
                    node: &node,
                    left: false,
                },
                parent,
            )
        },
    );
}

fn child<P, R>(producer: P, reducer: &R, offset: usize, up: Link<'_, R::Acc>, parent: Option<u64>)
where
    P: Producer,
    R: Reducer<P::Item>,
{
    runtime::note_task();
    let _task = trace::enter_task_with_parent(parent);
    depjoin_node(producer, reducer, offset, up);
}

fn deliver<T, R: Reducer<T>>(reducer: &R, mut link: Link<'_, R::Acc>, mut acc: R::Acc) {
    loop {
        match link {
            Link::Root(slot) => {
                *slot.lock().unwrap_or_else(|p| p.into_inner()) = Some(acc);
                return;
            }
            Link::Child { node, left } => {
                let sibling = {
                    let mut parked = node.parked.lock().unwrap_or_else(|p| p.into_inner());
                    match parked.take() {
                        Some(sibling) => sibling,
                        None => {
                            *parked = Some(acc);
                            return;
                        }
                    }
                };
                let _task = trace::resume_task(node.task);
                let _span = trace::span(labels::COMBINE);
                acc = if left {
                    reducer.combine(acc, sibling)
                } else {
                    reducer.combine(sibling, acc)
                };
                link = node.up;
            }
        }
    }
}
