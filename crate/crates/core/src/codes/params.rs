use crate::error::{Error, Result};
use crate::util::{degree_for, log2};

/// Largest field exponent whose `2^s` candidates the greedy builders will
/// enumerate per position.
pub const MAX_SEARCH_EXP: u8 = 22;

/// Per-round shape shared by both code builders.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundShape {
    /// Variables per round.
    pub k: u32,
    /// Field exponent; each round contributes `s` bits.
    pub s: u8,
    /// Per-variable degree cap, the least `d` with `(d+1)^k >= n`.
    pub d: u32,
    /// `k n^{1/k} 2^{-s}`.
    pub epsilon: f64,
}

/// Nested logs with every inner argument clamped to at least 16, so the
/// asymptotic parameter formulas stay meaningful on tiny inputs.
pub(crate) fn clamped_logs(x: f64) -> (f64, f64, f64) {
    let l1 = log2(if x < 16.0 { 16.0 } else { x });
    let l2 = log2(l1);
    let l3 = log2(l2);
    (l1, l2, l3)
}

/// `k = ceil(log log x)`, `s = ceil(log x / log log log x)`, then `s` is raised
/// until `epsilon <= 1/2`.
pub(crate) fn shape_for(x: f64, n: usize, k: Option<u32>, s: Option<u8>) -> Result<RoundShape> {
    let (l1, l2, l3) = clamped_logs(x);
    let k = k.unwrap_or(libm::ceil(l2) as u32).max(1);
    let eps_of = |s: u8| k as f64 * libm::pow(n.max(1) as f64, 1.0 / k as f64) / libm::exp2(s as f64);
    let s = match s {
        Some(s) => s,
        None => {
            let mut s = (libm::ceil(l1 / l3) as u8).max(2);
            while eps_of(s) > 0.5 && s < MAX_SEARCH_EXP {
                s += 1;
            }
            s
        }
    };
    if s == 0 || s > MAX_SEARCH_EXP {
        return Err(Error::Parameter(alloc::format!("field exponent {s} outside 1..={MAX_SEARCH_EXP}")));
    }
    let d = degree_for(n.max(1) as u64, k);
    if d as u64 >= 1u64 << s {
        return Err(Error::Parameter(alloc::format!("degree cap {d} is not below 2^{s}")));
    }
    Ok(RoundShape { k, s, d, epsilon: eps_of(s) })
}
