//! Parallel stable merge sorts.
//!
//! The input is divided together with a scratch buffer of the same length.
//! Leaves sort their part of the input sequentially; each combine merges
//! two sorted halves into the matching halves of the other buffer, so data
//! alternates between the buffers at every level. Forcing all leaves to an
//! even depth makes the final result land back in the input.

use std::fmt;

use crate::divisible::{fuse_slices_mut, Divisible};
use crate::iter::{
    co_rank, split_point, work, wrap_iter, IndexedParallelIterator, LengthMismatch,
    ParallelIterator, ParallelSlice, ParallelSliceMut,
};
use crate::policy::PolicyKind;
use crate::schedulers::Scheduler;

/// An input slice and a scratch slice of the same length.
#[derive(Debug)]
pub struct SortBuffers<'a, T> {
    input: &'a mut [T],
    scratch: &'a mut [T],
}

impl<'a, T> SortBuffers<'a, T> {
    pub fn new(input: &'a mut [T], scratch: &'a mut [T]) -> Result<Self, LengthMismatch> {
        if input.len() != scratch.len() {
            return Err(LengthMismatch {
                left: input.len(),
                right: scratch.len(),
            });
        }
        Ok(SortBuffers { input, scratch })
    }

    pub fn len(&self) -> usize {
        self.input.len()
    }

    pub fn is_empty(&self) -> bool {
        self.input.is_empty()
    }
}

impl<T: Send> Divisible for SortBuffers<'_, T> {
    fn base_length(&self) -> usize {
        self.input.len()
    }

    fn divide_at(self, index: usize) -> (Self, Self) {
        let index = index.min(self.input.len());
        let (i1, i2) = self.input.split_at_mut(index);
        let (s1, s2) = self.scratch.split_at_mut(index);
        (
            SortBuffers {
                input: i1,
                scratch: s1,
            },
            SortBuffers {
                input: i2,
                scratch: s2,
            },
        )
    }
}

/// Division policy of the sort tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortSplit {
    BoundDepth(usize),
    ThiefSplitting(Option<usize>),
    JoinContext(usize),
}

impl SortSplit {
    fn kind(self) -> PolicyKind {
        match self {
            SortSplit::BoundDepth(d) => PolicyKind::BoundDepth(d),
            SortSplit::ThiefSplitting(c) => PolicyKind::ThiefSplitting(c),
            SortSplit::JoinContext(d) => PolicyKind::JoinContext(d),
        }
    }
}

/// How two sorted halves are merged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MergePolicy {
    /// Merge iterator zipped with the output, adaptive scheduler.
    AdaptiveIter,
    /// Merge iterator zipped with the output, thief splitting under join.
    ThiefIter,
    /// Hand-written slice merge driven by [`work`].
    Slice,
}

impl MergePolicy {
    pub fn name(self) -> &'static str {
        match self {
            MergePolicy::AdaptiveIter => "adaptive_merge",
            MergePolicy::ThiefIter => "thief_merge",
            MergePolicy::Slice => "slice_merge",
        }
    }
}

/// One of the sort configurations: division policy, tree scheduler and
/// merge policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SortVariant {
    pub split: SortSplit,
    /// [`Scheduler::Join`] or [`Scheduler::DepJoin`].
    pub scheduler: Scheduler,
    pub merge: MergePolicy,
}

impl SortVariant {
    /// The 18 combinations of {bound_depth, thief_splitting, join_context}
    /// × {join, depjoin} × {adaptive, thief, slice merge}.
    pub fn all() -> Vec<SortVariant> {
        let splits = [
            SortSplit::BoundDepth(6),
            SortSplit::ThiefSplitting(None),
            SortSplit::JoinContext(5),
        ];
        let schedulers = [Scheduler::Join, Scheduler::DepJoin];
        let merges = [
            MergePolicy::AdaptiveIter,
            MergePolicy::ThiefIter,
            MergePolicy::Slice,
        ];
        let mut variants = Vec::with_capacity(18);
        for split in splits {
            for scheduler in schedulers {
                for merge in merges {
                    variants.push(SortVariant {
                        split,
                        scheduler,
                        merge,
                    });
                }
            }
        }
        variants
    }
}

impl fmt::Display for SortVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.split.kind())?;
        if self.scheduler == Scheduler::DepJoin {
            write!(f, "+depjoin")?;
        }
        write!(f, "+{}", self.merge.name())
    }
}

fn merge_into<T>(left: &[T], right: &[T], out: &mut [T], merge: MergePolicy)
where
    T: Ord + Copy + Send + Sync,
{
    match merge {
        MergePolicy::AdaptiveIter => left
            .par_iter()
            .merge(right)
            .zip(out.par_iter_mut())
            .expect("merge output has the combined length")
            .for_each(|(x, o)| *o = *x),
        MergePolicy::ThiefIter => left
            .par_iter()
            .merge(right)
            .zip(out.par_iter_mut())
            .expect("merge output has the combined length")
            .thief_splitting()
            .with_scheduler(Scheduler::Join)
            .for_each(|(x, o)| *o = *x),
        MergePolicy::Slice => merge_slices_adaptive(left, right, out),
    }
}

/// Stably sorts `buffers.input`, using `buffers.scratch` as merge space.
pub fn merge_sort_iter<T>(buffers: SortBuffers<'_, T>, variant: SortVariant)
where
    T: Ord + Copy + Send + Sync,
{
    let input_start = buffers.input.as_ptr();
    let policies = [variant.split.kind(), PolicyKind::EvenLevels];
    let sorted = wrap_iter(buffers)
        .with_policies(&policies)
        .map(|leaf: SortBuffers<'_, T>| {
            leaf.input.sort();
            leaf
        })
        .with_scheduler(variant.scheduler)
        .reduce_with(|a, b| {
            let merged = fuse_slices_mut(a.scratch, b.scratch);
            merge_into(a.input, b.input, merged, variant.merge);
            SortBuffers {
                input: merged,
                scratch: fuse_slices_mut(a.input, b.input),
            }
        });
    if let Some(sorted) = sorted {
        if !std::ptr::eq(sorted.input.as_ptr(), input_start) {
            sorted.scratch.copy_from_slice(sorted.input);
        }
    }
}

struct SliceMerge<'a, T> {
    left: &'a [T],
    right: &'a [T],
    out: &'a mut [T],
}

impl<'a, T: Ord + Copy + Send + Sync> SliceMerge<'a, T> {
    fn parts(self, i: usize, j: usize) -> (Self, Self) {
        let (l1, l2) = self.left.split_at(i);
        let (r1, r2) = self.right.split_at(j);
        let (o1, o2) = self.out.split_at_mut(i + j);
        (
            SliceMerge {
                left: l1,
                right: r1,
                out: o1,
            },
            SliceMerge {
                left: l2,
                right: r2,
                out: o2,
            },
        )
    }

    fn advance(&mut self, budget: usize) {
        let count = budget.min(self.out.len());
        let (mut left, mut right) = (self.left, self.right);
        let out = std::mem::take(&mut self.out);
        let (head, rest) = out.split_at_mut(count);
        let mut slots = head.iter_mut();
        while let (Some(&l), Some(&r)) = (left.first(), right.first()) {
            let Some(slot) = slots.next() else { break };
            if l <= r {
                *slot = l;
                left = &left[1..];
            } else {
                *slot = r;
                right = &right[1..];
            }
        }
        let tail = slots.into_slice();
        if !tail.is_empty() {
            let source = if left.is_empty() {
                &mut right
            } else {
                &mut left
            };
            let (copied, remaining) = source.split_at(tail.len());
            tail.copy_from_slice(copied);
            *source = remaining;
        }
        self.left = left;
        self.right = right;
        self.out = rest;
    }
}

impl<T: Ord + Copy + Send + Sync> Divisible for SliceMerge<'_, T> {
    fn base_length(&self) -> usize {
        self.out.len()
    }

    fn divide(self) -> (Self, Self) {
        let (i, j) = split_point(self.left, self.right);
        self.parts(i, j)
    }

    fn divide_at(self, index: usize) -> (Self, Self) {
        let k = index.min(self.out.len());
        let i = co_rank(self.left, self.right, k);
        self.parts(i, k - i)
    }
}

/// Stable merge of two sorted slices into `out`, equal elements taken
/// from `left` first.
///
/// # Panics
/// If `out.len() != left.len() + right.len()`.
pub fn merge_slices_adaptive<T>(left: &[T], right: &[T], out: &mut [T])
where
    T: Ord + Copy + Send + Sync,
{
    assert_eq!(
        out.len(),
        left.len() + right.len(),
        "output length must match the inputs"
    );
    work(
        SliceMerge { left, right, out },
        |state: &mut SliceMerge<'_, T>, budget| state.advance(budget),
    )
    .for_each(|_| ());
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slice_merge_small_cases() {
        let mut out = [0; 4];
        merge_slices_adaptive(&[1, 3], &[2, 4], &mut out);
        assert_eq!(out, [1, 2, 3, 4]);
        let mut out = [0; 3];
        merge_slices_adaptive(&[], &[5, 6, 7], &mut out);
        assert_eq!(out, [5, 6, 7]);
        merge_slices_adaptive(&[5, 6, 7], &[], &mut out);
        assert_eq!(out, [5, 6, 7]);
    }

    #[test]
    fn bounded_advances_compose() {
        let left = [1, 4, 4, 9];
        let right = [0, 4, 5];
        let mut out = [0; 7];
        let mut state = SliceMerge {
            left: &left,
            right: &right,
            out: &mut out,
        };
        for budget in [1, 2, 1, 10] {
            state.advance(budget);
        }
        assert_eq!(state.base_length(), 0);
        assert_eq!(out, [0, 1, 4, 4, 4, 5, 9]);
    }

    #[test]
    fn rejects_mismatched_buffers() {
        let (mut a, mut b) = ([1, 2, 3], [0; 2]);
        assert_eq!(
            SortBuffers::new(&mut a, &mut b).err(),
            Some(LengthMismatch { left: 3, right: 2 })
        );
    }

    #[test]
    fn every_variant_sorts_small_inputs() {
        let original: Vec<i32> = (0..500).map(|i| (i * 7919 % 613) - 300).collect();
        assert_eq!(SortVariant::all().len(), 18);
        for variant in SortVariant::all() {
            for len in [0, 1, 2, 3, 17, 500] {
                let mut data = original[..len].to_vec();
                let mut scratch = vec![0; len];
                merge_sort_iter(SortBuffers::new(&mut data, &mut scratch).unwrap(), variant);
                let mut want = original[..len].to_vec();
                want.sort();
                assert_eq!(data, want, "{variant} len {len}");
            }
        }
    }
}
