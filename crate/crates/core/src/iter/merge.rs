use super::sources::SliceIter;
use super::{IndexedParallelIterator, ParallelIterator};
use crate::divisible::{Divisible, Producer};
use crate::schedulers::{AdaptiveConfig, Schedule, Scheduler};

impl<'a, T: Ord + Sync> SliceIter<'a, T> {
    /// Stable merge with another sorted slice: equal elements come from
    /// `self` first. Runs under the adaptive scheduler unless another one is
    /// selected. Unsorted inputs give an unspecified order.
    pub fn merge(self, right: &'a [T]) -> MergeIter<'a, T> {
        MergeIter {
            left: self.slice,
            right,
        }
    }
}

pub struct MergeIter<'a, T> {
    left: &'a [T],
    right: &'a [T],
}

impl<'a, T: Ord + Sync> ParallelIterator for MergeIter<'a, T> {
    type Item = &'a T;
    type Producer = MergeProducer<'a, T>;

    fn into_producer(self) -> Self::Producer {
        MergeProducer {
            left: self.left,
            right: self.right,
        }
    }

    fn schedule(&self) -> Schedule {
        Schedule {
            scheduler: Scheduler::Adaptive(AdaptiveConfig::default()),
            blocks: None,
        }
    }
}

impl<T: Ord + Sync> IndexedParallelIterator for MergeIter<'_, T> {
    fn len(&self) -> usize {
        self.left.len() + self.right.len()
    }
}

#[derive(Debug)]
pub struct MergeProducer<'a, T> {
    left: &'a [T],
    right: &'a [T],
}

impl<'a, T: Ord> MergeProducer<'a, T> {
    pub fn new(left: &'a [T], right: &'a [T]) -> Self {
        MergeProducer { left, right }
    }

    pub fn remaining(&self) -> (&'a [T], &'a [T]) {
        (self.left, self.right)
    }

    fn parts(self, i: usize, j: usize) -> (Self, Self) {
        let (l1, l2) = self.left.split_at(i);
        let (r1, r2) = self.right.split_at(j);
        (
            MergeProducer {
                left: l1,
                right: r1,
            },
            MergeProducer {
                left: l2,
                right: r2,
            },
        )
    }
}

/// Number of left elements among the first `k` of the stable merge.
pub(crate) fn co_rank<T: Ord>(left: &[T], right: &[T], k: usize) -> usize {
    let mut lo = k.saturating_sub(right.len());
    let mut hi = k.min(left.len());
    while lo < hi {
        let i = lo + (hi - lo) / 2;
        // Taking i left elements is too few when left[i] would precede
        // right[k - i - 1] in the merge (ties go left).
        if left[i] <= right[k - i - 1] {
            lo = i + 1;
        } else {
            hi = i;
        }
    }
    lo
}

/// Cut positions `(i, j)` such that `left[..i]` and `right[..j]` form a
/// prefix of the stable merge, splitting the longer side at its midpoint.
pub(crate) fn split_point<T: Ord>(left: &[T], right: &[T]) -> (usize, usize) {
    if left.len() >= right.len() {
        let i = left.len() / 2;
        match left.get(i) {
            Some(pivot) => (i, right.partition_point(|x| x < pivot)),
            None => (0, 0),
        }
    } else {
        let j = right.len() / 2;
        let pivot = &right[j];
        (left.partition_point(|x| x <= pivot), j)
    }
}

impl<'a, T: Ord + Sync> Divisible for MergeProducer<'a, T> {
    fn base_length(&self) -> usize {
        self.left.len() + self.right.len()
    }

    /// Splits the longer side at its midpoint and binary-searches the
    /// matching position in the other side.
    fn divide(self) -> (Self, Self) {
        let (i, j) = split_point(self.left, self.right);
        self.parts(i, j)
    }

    fn divide_at(self, index: usize) -> (Self, Self) {
        let k = index.min(self.base_length());
        let i = co_rank(self.left, self.right, k);
        self.parts(i, k - i)
    }
}

impl<'a, T: Ord> Iterator for MergeProducer<'a, T> {
    type Item = &'a T;

    #[inline]
    fn next(&mut self) -> Option<&'a T> {
        match (self.left.first(), self.right.first()) {
            (Some(l), Some(r)) => {
                if l <= r {
                    self.left = &self.left[1..];
                    Some(l)
                } else {
                    self.right = &self.right[1..];
                    Some(r)
                }
            }
            (Some(l), None) => {
                self.left = &self.left[1..];
                Some(l)
            }
            (None, Some(r)) => {
                self.right = &self.right[1..];
                Some(r)
            }
            (None, None) => None,
        }
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.left.len() + self.right.len();
        (n, Some(n))
    }
}

impl<T: Ord + Sync> Producer for MergeProducer<'_, T> {
    fn partial_fold<B, F>(&mut self, init: B, mut fold_op: F, limit: usize) -> B
    where
        F: FnMut(B, Self::Item) -> B,
    {
        let mut acc = init;
        let mut budget = limit.min(self.base_length());
        let (mut left, mut right) = (self.left, self.right);
        while budget > 0 {
            match (left.split_first(), right.split_first()) {
                (Some((l, lrest)), Some((r, rrest))) => {
                    if l <= r {
                        acc = fold_op(acc, l);
                        left = lrest;
                    } else {
                        acc = fold_op(acc, r);
                        right = rrest;
                    }
                    budget -= 1;
                }
                (Some(_), None) => {
                    let (head, rest) = left.split_at(budget);
                    acc = head.iter().fold(acc, &mut fold_op);
                    left = rest;
                    budget = 0;
                }
                (None, _) => {
                    let (head, rest) = right.split_at(budget);
                    acc = head.iter().fold(acc, &mut fold_op);
                    right = rest;
                    budget = 0;
                }
            }
        }
        self.left = left;
        self.right = right;
        acc
    }
}
