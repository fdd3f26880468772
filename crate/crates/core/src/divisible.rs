//! The division contract shared by every source, producer and adaptor.

use std::ops::Range;

/// A finite piece of work that can be cut in two independent parts.
///
/// Lengths are counted in units of the root source (elements of a slice,
/// integers of a range...). Adaptors that drop or regroup items (filter,
/// fold) keep reporting the length of their base, so that positions stay
/// comparable across a whole division tree.
pub trait Divisible: Sized + Send {
    /// Remaining length.
    fn base_length(&self) -> usize;

    /// Whether the scheduler should divide this piece further.
    ///
    /// Base sources answer `true` iff they hold more than one element;
    /// splitting policies override the answer.
    fn should_be_divided(&self) -> bool {
        self.base_length() > 1
    }

    /// Splits in two parts whose lengths differ by at most one, the left one
    /// receiving the extra element.
    fn divide(self) -> (Self, Self) {
        let mid = self.base_length().div_ceil(2);
        self.divide_at(mid)
    }

    /// Splits so that the left part holds `min(index, length)` elements.
    fn divide_at(self, index: usize) -> (Self, Self);

    /// Cuts off a prefix of `index` elements without counting as a division
    /// of the task tree: both parts keep the splitting state of `self`. Used
    /// by block schedules, whose blocks are independent runs.
    fn cut_at(self, index: usize) -> (Self, Self) {
        self.divide_at(index)
    }
}

/// A divisible source that also yields its items sequentially, in order.
pub trait Producer: Divisible + Iterator {
    /// Folds at most `limit` items, leaving the remainder in `self`.
    ///
    /// Exactly `min(limit, base_length())` units of the base are consumed.
    fn partial_fold<B, F>(&mut self, init: B, fold_op: F, limit: usize) -> B
    where
        F: FnMut(B, Self::Item) -> B,
    {
        self.by_ref().take(limit).fold(init, fold_op)
    }
}

macro_rules! divisible_range {
    ($($t:ty),*) => {$(
        impl Divisible for Range<$t> {
            #[inline]
            fn base_length(&self) -> usize {
                if self.end > self.start {
                    (self.end - self.start) as usize
                } else {
                    0
                }
            }

            fn divide_at(self, index: usize) -> (Self, Self) {
                let cut = index.min(self.base_length());
                let mid = self.start + cut as $t;
                (self.start..mid, mid..self.end.max(mid))
            }
        }

        impl Producer for Range<$t> {}
    )*};
}

divisible_range!(usize, u64, u32, i64, i32);

impl<T: Sync> Divisible for &[T] {
    #[inline]
    fn base_length(&self) -> usize {
        self.len()
    }

    fn divide_at(self, index: usize) -> (Self, Self) {
        self.split_at(index.min(self.len()))
    }
}

impl<T: Send> Divisible for &mut [T] {
    #[inline]
    fn base_length(&self) -> usize {
        self.len()
    }

    fn divide_at(self, index: usize) -> (Self, Self) {
        let cut = index.min(self.len());
        self.split_at_mut(cut)
    }
}

impl<'a, T: Sync> Divisible for std::slice::Iter<'a, T> {
    #[inline]
    fn base_length(&self) -> usize {
        self.len()
    }

    fn divide_at(self, index: usize) -> (Self, Self) {
        let slice: &'a [T] = self.as_slice();
        let (left, right) = slice.divide_at(index);
        (left.iter(), right.iter())
    }
}

impl<T: Sync> Producer for std::slice::Iter<'_, T> {
    fn partial_fold<B, F>(&mut self, init: B, fold_op: F, limit: usize) -> B
    where
        F: FnMut(B, Self::Item) -> B,
    {
        let slice = self.as_slice();
        let (head, tail) = slice.split_at(limit.min(slice.len()));
        *self = tail.iter();
        head.iter().fold(init, fold_op)
    }
}

impl<T: Send> Divisible for std::slice::IterMut<'_, T> {
    #[inline]
    fn base_length(&self) -> usize {
        self.len()
    }

    fn divide_at(self, index: usize) -> (Self, Self) {
        let (left, right) = self.into_slice().divide_at(index);
        (left.iter_mut(), right.iter_mut())
    }
}

impl<T: Send> Producer for std::slice::IterMut<'_, T> {
    fn partial_fold<B, F>(&mut self, init: B, fold_op: F, limit: usize) -> B
    where
        F: FnMut(B, Self::Item) -> B,
    {
        let slice = std::mem::take(self).into_slice();
        let (head, tail) = slice.split_at_mut(limit.min(slice.len()));
        *self = tail.iter_mut();
        head.iter_mut().fold(init, fold_op)
    }
}

/// Pairs of equal-length sources divide both components at the same index.
impl<A: Divisible, B: Divisible> Divisible for (A, B) {
    #[inline]
    fn base_length(&self) -> usize {
        debug_assert_eq!(self.0.base_length(), self.1.base_length());
        self.0.base_length()
    }

    fn should_be_divided(&self) -> bool {
        self.0.should_be_divided() && self.1.should_be_divided()
    }

    fn divide_at(self, index: usize) -> (Self, Self) {
        let (a_left, a_right) = self.0.divide_at(index);
        let (b_left, b_right) = self.1.divide_at(index);
        ((a_left, b_left), (a_right, b_right))
    }

    fn cut_at(self, index: usize) -> (Self, Self) {
        let (a_left, a_right) = self.0.cut_at(index);
        let (b_left, b_right) = self.1.cut_at(index);
        ((a_left, b_left), (a_right, b_right))
    }
}

/// Fuses two slices that are adjacent in memory back into one.
///
/// Panics if `right` does not start where `left` ends.
pub fn fuse_slices<'a, T>(left: &'a [T], right: &'a [T]) -> &'a [T] {
    if left.is_empty() {
        return right;
    }
    if right.is_empty() {
        return left;
    }
    assert!(
        std::ptr::eq(left.as_ptr_range().end, right.as_ptr()),
        "fused slices must be adjacent"
    );
    // SAFETY: both slices are live for 'a and contiguous, so the fused
    // range is a single initialized allocation region.
    unsafe { std::slice::from_raw_parts(left.as_ptr(), left.len() + right.len()) }
}

/// Mutable counterpart of [`fuse_slices`].
pub fn fuse_slices_mut<'a, T>(left: &'a mut [T], right: &'a mut [T]) -> &'a mut [T] {
    if left.is_empty() {
        return right;
    }
    if right.is_empty() {
        return left;
    }
    assert!(
        std::ptr::eq(left.as_ptr_range().end, right.as_ptr()),
        "fused slices must be adjacent"
    );
    // SAFETY: both borrows are exclusive for 'a, contiguous, and consumed
    // here, so the fused slice is the only access path to that memory.
    unsafe { std::slice::from_raw_parts_mut(left.as_mut_ptr(), left.len() + right.len()) }
}
