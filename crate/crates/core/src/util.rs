use alloc::vec::Vec;

pub(crate) fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

pub(crate) fn log2(x: f64) -> f64 {
    libm::log2(x)
}

/// Smallest `d` with `(d + 1)^k >= n`.
pub(crate) fn degree_for(n: u64, k: u32) -> u32 {
    let mut d = 0u32;
    while pow_sat(d as u64 + 1, k) < n {
        d += 1;
    }
    d
}

pub(crate) fn pow_sat(base: u64, e: u32) -> u64 {
    let mut acc = 1u64;
    for _ in 0..e {
        acc = acc.saturating_mul(base);
    }
    acc
}

/// Sorted, deduplicated copy of an index set.
pub(crate) fn normalized(set: &[usize]) -> Vec<usize> {
    let mut v = set.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}
