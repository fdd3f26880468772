//! Oracles and instrumented sources shared by the integration tests and the
//! acceptance suite.
#![allow(dead_code)]

use std::collections::VecDeque;
use std::ops::Range;

use rand::Rng;
use splitkit::policy::PolicyKind;
use splitkit::prelude::*;

/// A range that remembers its depth in the division tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tracked {
    pub range: Range<usize>,
    pub depth: usize,
    /// Whether the source itself asks to be divided.
    pub divisible: bool,
}

impl Tracked {
    pub fn new(n: usize) -> Self {
        Tracked {
            range: 0..n,
            depth: 0,
            divisible: true,
        }
    }

    pub fn rigid(n: usize) -> Self {
        Tracked {
            range: 0..n,
            depth: 0,
            divisible: false,
        }
    }
}

impl Divisible for Tracked {
    fn base_length(&self) -> usize {
        self.range.len()
    }

    fn should_be_divided(&self) -> bool {
        self.divisible && self.range.len() > 1
    }

    fn divide_at(self, index: usize) -> (Self, Self) {
        let mid = self.range.start + index.min(self.range.len());
        let depth = self.depth + 1;
        (
            Tracked {
                range: self.range.start..mid,
                depth,
                divisible: self.divisible,
            },
            Tracked {
                range: mid..self.range.end,
                depth,
                divisible: self.divisible,
            },
        )
    }
}

/// Leaves of the division tree built by `policies` over `source`, in order.
pub fn leaves(source: Tracked, policies: &[PolicyKind]) -> Vec<Tracked> {
    wrap_iter(source).with_policies(policies).collect()
}

/// Expected leaves when every node at `(start, len, depth, is_right)` is
/// divided at its midpoint iff `split` says so.
pub fn oracle_leaves(
    n: usize,
    split: &dyn Fn(usize, usize, bool) -> bool,
) -> Vec<(Range<usize>, usize)> {
    fn go(
        start: usize,
        len: usize,
        depth: usize,
        right: bool,
        split: &dyn Fn(usize, usize, bool) -> bool,
        out: &mut Vec<(Range<usize>, usize)>,
    ) {
        if split(len, depth, right) {
            let half = len.div_ceil(2);
            go(start, half, depth + 1, false, split, out);
            go(start + half, len - half, depth + 1, true, split, out);
        } else {
            out.push((start..start + len, depth));
        }
    }
    let mut out = Vec::new();
    go(0, n, 0, false, split, &mut out);
    out
}

pub fn shape(leaves: &[Tracked]) -> Vec<(Range<usize>, usize)> {
    leaves.iter().map(|t| (t.range.clone(), t.depth)).collect()
}

/// Whether the leaves cover `0..n` in order without overlap.
pub fn partitions(leaves: &[Tracked], n: usize) -> bool {
    let mut next = 0;
    for leaf in leaves {
        if leaf.range.start != next {
            return false;
        }
        next = leaf.range.end;
    }
    next == n
}

/// Classic sequential fannkuch enumeration: (checksum, max flips).
pub fn fannkuch_oracle(n: usize) -> (i64, u32) {
    let mut perm1: Vec<usize> = (0..n).collect();
    let mut count = vec![0usize; n];
    let (mut checksum, mut max_flips, mut perm_count) = (0i64, 0u32, 0u64);
    let mut r = n;
    loop {
        while r != 1 {
            count[r - 1] = r;
            r -= 1;
        }
        let mut perm = perm1.clone();
        let mut flips = 0u32;
        while perm[0] != 0 {
            let k = perm[0];
            perm[..=k].reverse();
            flips += 1;
        }
        max_flips = max_flips.max(flips);
        checksum += if perm_count % 2 == 0 {
            flips as i64
        } else {
            -(flips as i64)
        };
        loop {
            if r == n {
                return (checksum, max_flips);
            }
            let first = perm1[0];
            for i in 0..r {
                perm1[i] = perm1[i + 1];
            }
            perm1[r] = first;
            count[r] -= 1;
            if count[r] > 0 {
                break;
            }
            r += 1;
        }
        perm_count += 1;
    }
}

/// Random directed graph as adjacency lists.
pub fn random_graph(rng: &mut impl Rng, nodes: usize, edges: usize) -> Vec<Vec<usize>> {
    let mut adjacency = vec![Vec::new(); nodes];
    for _ in 0..edges {
        let (a, b) = (rng.gen_range(0..nodes), rng.gen_range(0..nodes));
        adjacency[a].push(b);
    }
    adjacency
}

/// Nodes reachable from `root`, by breadth-first search.
pub fn bfs(adjacency: &[Vec<usize>], root: usize) -> Vec<bool> {
    let mut seen = vec![false; adjacency.len()];
    let mut queue = VecDeque::from([root]);
    seen[root] = true;
    while let Some(node) = queue.pop_front() {
        for &next in &adjacency[node] {
            if !seen[next] {
                seen[next] = true;
                queue.push_back(next);
            }
        }
    }
    seen
}

/// Sequential stable merge of two sorted slices.
pub fn two_pointer<T: Ord + Copy>(left: &[T], right: &[T]) -> Vec<T> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(left.len() + right.len());
    while i < left.len() && j < right.len() {
        if left[i] <= right[j] {
            out.push(left[i]);
            i += 1;
        } else {
            out.push(right[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&left[i..]);
    out.extend_from_slice(&right[j..]);
    out
}

/// Pair ordered by its first field only, to observe stability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Keyed {
    pub key: u32,
    pub seq: u32,
}

impl PartialOrd for Keyed {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Keyed {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key.cmp(&other.key)
    }
}

pub fn pool(workers: usize) -> Runtime {
    Runtime::install(RuntimeConfig::new(workers)).expect("install runtime")
}
