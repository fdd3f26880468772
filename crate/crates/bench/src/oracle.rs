//! Sequential reference results the benchmark runs are checked against.

/// Checksum and maximum flip count by the classic enumeration of all
/// permutations of `0..n` (the counter-based rotation scheme).
pub fn fannkuch(n: usize) -> (i64, u32) {
    let mut perm1: Vec<usize> = (0..n).collect();
    let mut count = vec![0usize; n];
    let (mut checksum, mut max_flips) = (0i64, 0u32);
    let mut sign = 1i64;
    let mut r = n;
    loop {
        while r > 1 {
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
        checksum += sign * flips as i64;
        sign = -sign;
        loop {
            if r == n {
                return (checksum, max_flips);
            }
            perm1[..=r].rotate_left(1);
            count[r] -= 1;
            if count[r] > 0 {
                break;
            }
            r += 1;
        }
    }
}

/// Maximum nonempty subarray sum, 0 when empty.
pub fn max_sum(values: &[i64]) -> i64 {
    let mut best: Option<i64> = None;
    let mut current = 0i64;
    for &x in values {
        current = if current > 0 { current + x } else { x };
        best = Some(best.map_or(current, |b| b.max(current)));
    }
    best.unwrap_or(0)
}
