//! Maximum number of prefix reversals over all permutations of `0..n`.
//!
//! Permutations are enumerated in a fixed order and identified by their
//! index, so any index range can be processed independently. A task that
//! continues a range steps from one permutation to the next cheaply; only a
//! range obtained by division has to build its first permutation from its
//! index.

use std::ops::Range;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::divisible::Divisible;
use crate::iter::{work, IntoParallelIterator, ParallelIterator};
use crate::runtime;
use crate::schedulers::Scheduler;

pub const MAX_FANNKUCH_N: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FannkuchResult {
    pub checksum: i64,
    pub max_flips: u32,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FannkuchPolicy {
    /// Fixed partition into `blocks` ranges (default: 8 per worker), each
    /// built from scratch.
    StaticChunks {
        blocks: Option<usize>,
    },
    ThiefSplitting,
    Adaptive,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FannkuchError {
    #[error("sequence length {0} outside 1..={MAX_FANNKUCH_N}")]
    OutOfRange(usize),
}

const FACTORIALS: [usize; MAX_FANNKUCH_N + 1] = {
    let mut table = [1usize; MAX_FANNKUCH_N + 1];
    let mut i = 1;
    while i <= MAX_FANNKUCH_N {
        table[i] = table[i - 1] * i;
        i += 1;
    }
    table
};

#[derive(Debug, Clone)]
struct Permutation {
    values: [u8; MAX_FANNKUCH_N],
    count: [u8; MAX_FANNKUCH_N],
}

impl Permutation {
    fn at(n: usize, index: usize) -> Self {
        let mut values = [0u8; MAX_FANNKUCH_N];
        for (i, v) in values.iter_mut().enumerate().take(n) {
            *v = i as u8;
        }
        let mut count = [0u8; MAX_FANNKUCH_N];
        let mut rest = index;
        for i in (1..n).rev() {
            let digit = rest / FACTORIALS[i];
            rest %= FACTORIALS[i];
            count[i] = digit as u8;
            values[..=i].rotate_left(digit);
        }
        Permutation { values, count }
    }

    fn step(&mut self, n: usize) {
        for i in 1..n {
            self.values[..=i].rotate_left(1);
            self.count[i] += 1;
            if self.count[i] as usize <= i {
                return;
            }
            self.count[i] = 0;
        }
    }

    fn flips(&self) -> u32 {
        let mut values = self.values;
        let mut flips = 0;
        let mut first = values[0] as usize;
        while first != 0 {
            values[..=first].reverse();
            flips += 1;
            first = values[0] as usize;
        }
        flips
    }
}

struct Chunk<'c> {
    n: usize,
    range: Range<usize>,
    permutation: Option<Permutation>,
    checksum: i64,
    max_flips: u32,
    from_scratch: &'c AtomicU64,
}

impl<'c> Chunk<'c> {
    fn advance(&mut self, budget: usize) {
        if self.range.is_empty() {
            return;
        }
        let permutation = self.permutation.get_or_insert_with(|| {
            self.from_scratch.fetch_add(1, Ordering::Relaxed);
            Permutation::at(self.n, self.range.start)
        });
        let end = self.range.end.min(self.range.start.saturating_add(budget));
        for index in self.range.start..end {
            let flips = permutation.flips();
            if index % 2 == 0 {
                self.checksum += flips as i64;
            } else {
                self.checksum -= flips as i64;
            }
            self.max_flips = self.max_flips.max(flips);
            if index + 1 < self.range.end {
                permutation.step(self.n);
            }
        }
        self.range.start = end;
    }

    fn with_range(&self, range: Range<usize>) -> Self {
        Chunk {
            n: self.n,
            range,
            permutation: None,
            checksum: 0,
            max_flips: 0,
            from_scratch: self.from_scratch,
        }
    }
}

impl Divisible for Chunk<'_> {
    fn base_length(&self) -> usize {
        self.range.len()
    }

    fn divide_at(self, index: usize) -> (Self, Self) {
        let mid = self.range.start + index.min(self.range.len());
        let right = self.with_range(mid..self.range.end);
        let left = Chunk {
            range: self.range.start..mid,
            ..self
        };
        (left, right)
    }
}

fn combine(a: (i64, u32), b: (i64, u32)) -> (i64, u32) {
    (a.0 + b.0, a.1.max(b.1))
}

pub fn fannkuch(n: usize, policy: FannkuchPolicy) -> Result<FannkuchResult, FannkuchError> {
    fannkuch_counted(n, policy).map(|(result, _)| result)
}

/// Like [`fannkuch`], also returning how many permutations were built from
/// their index rather than reached by stepping.
pub fn fannkuch_counted(
    n: usize,
    policy: FannkuchPolicy,
) -> Result<(FannkuchResult, u64), FannkuchError> {
    if !(1..=MAX_FANNKUCH_N).contains(&n) {
        return Err(FannkuchError::OutOfRange(n));
    }
    let total = FACTORIALS[n];
    let from_scratch = AtomicU64::new(0);
    let root = Chunk {
        n,
        range: 0..total,
        permutation: Some(Permutation::at(n, 0)),
        checksum: 0,
        max_flips: 0,
        from_scratch: &from_scratch,
    };
    let advance = |chunk: &mut Chunk<'_>, budget: usize| chunk.advance(budget);
    let summary = |chunk: Chunk<'_>| (chunk.checksum, chunk.max_flips);
    let (checksum, max_flips) = match policy {
        FannkuchPolicy::Adaptive => work(root, advance).map(summary).reduce(|| (0, 0), combine),
        FannkuchPolicy::ThiefSplitting => work(root, advance)
            .thief_splitting()
            .with_scheduler(Scheduler::Join)
            .map(summary)
            .reduce(|| (0, 0), combine),
        FannkuchPolicy::StaticChunks { blocks } => {
            let blocks = blocks
                .unwrap_or(8 * runtime::current_num_workers())
                .clamp(1, total);
            (0..blocks)
                .into_par_iter()
                .map(|b| {
                    let mut chunk = root.with_range(b * total / blocks..(b + 1) * total / blocks);
                    chunk.advance(usize::MAX);
                    (chunk.checksum, chunk.max_flips)
                })
                .reduce(|| (0, 0), combine)
        }
    };
    let result = FannkuchResult {
        checksum,
        max_flips,
        n,
    };
    Ok((result, from_scratch.load(Ordering::Relaxed)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stepping_matches_indexing() {
        let n = 5;
        let mut permutation = Permutation::at(n, 0);
        for index in 1..FACTORIALS[n] {
            permutation.step(n);
            assert_eq!(
                permutation.values,
                Permutation::at(n, index).values,
                "index {index}"
            );
        }
    }

    #[test]
    fn seven_gives_known_values() {
        let result = fannkuch(7, FannkuchPolicy::Adaptive).unwrap();
        assert_eq!((result.checksum, result.max_flips), (228, 16));
    }

    #[test]
    fn rejects_out_of_range_lengths() {
        assert_eq!(
            fannkuch(0, FannkuchPolicy::Adaptive),
            Err(FannkuchError::OutOfRange(0))
        );
        assert_eq!(
            fannkuch(17, FannkuchPolicy::ThiefSplitting),
            Err(FannkuchError::OutOfRange(17))
        );
    }

    #[test]
    fn sequential_run_builds_nothing_from_scratch() {
        let (_, built) = fannkuch_counted(6, FannkuchPolicy::Adaptive).unwrap();
        assert_eq!(built, 0);
        let (_, built) =
            fannkuch_counted(6, FannkuchPolicy::StaticChunks { blocks: Some(4) }).unwrap();
        assert_eq!(built, 4);
    }
}
