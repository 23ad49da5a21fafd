use alloc::vec::Vec;
use core::fmt;

use super::{Code, NeighborhoodFamily};
use crate::error::Error;
use crate::gf2core::EchelonBasis;
use crate::par::map_indexed;

/// Default cap on `2^L` for exhaustive seed enumeration.
pub const DEFAULT_SEED_BUDGET: u64 = 1 << 28;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VerifyMode {
    /// `A(e) != 0` for every nonempty `e`.
    Unbiased,
    /// Exact uniform marginals on every `e`, checked over all seeds.
    Fooling,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoolingCertificate {
    pub family: NeighborhoodFamily,
    pub mode: VerifyMode,
    /// `2^L` in fooling mode; 0 in unbiased mode, which enumerates nothing.
    pub checked_seed_count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerifyFailure {
    Dimension {
        code_n: usize,
        family_n: usize,
    },
    Budget {
        length: usize,
        budget: u64,
    },
    /// Position in the original family of a nonempty set with `A(e) = 0`.
    ZeroXor {
        set: usize,
    },
    /// First under-represented pattern on a set, in lexicographic order.
    Pattern {
        set: usize,
        pattern: Vec<bool>,
        count: u64,
        expected_times_2w: u64,
    },
}

impl fmt::Display for VerifyFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Dimension { code_n, family_n } => {
                write!(f, "code has {code_n} vectors but the family is over {family_n} indices")
            }
            Self::Budget { length, budget } => write!(f, "2^{length} seeds exceed the budget of {budget}"),
            Self::ZeroXor { set } => write!(f, "set #{set} has A(e) = 0"),
            Self::Pattern { set, pattern, count, .. } => {
                write!(f, "set #{set}: pattern ")?;
                for &b in pattern {
                    write!(f, "{}", b as u8)?;
                }
                write!(f, " has seed count {count}")
            }
        }
    }
}

impl From<VerifyFailure> for Error {
    fn from(v: VerifyFailure) -> Self {
        match v {
            VerifyFailure::Budget { .. } => Error::Budget(alloc::format!("{v}")),
            other => Error::Verification(alloc::format!("{other}")),
        }
    }
}

pub fn verify_code(
    a: &Code,
    family: &NeighborhoodFamily,
    mode: VerifyMode,
) -> Result<FoolingCertificate, VerifyFailure> {
    verify_code_with_budget(a, family, mode, DEFAULT_SEED_BUDGET)
}

pub fn verify_code_with_budget(
    a: &Code,
    family: &NeighborhoodFamily,
    mode: VerifyMode,
    budget: u64,
) -> Result<FoolingCertificate, VerifyFailure> {
    if a.n() != family.n() {
        return Err(VerifyFailure::Dimension { code_n: a.n(), family_n: family.n() });
    }
    let checked_seed_count = match mode {
        VerifyMode::Unbiased => {
            for (idx, e) in family.sets().iter().enumerate() {
                if !e.is_empty() && a.code_xor(e).expect("indices validated by the family").is_zero() {
                    return Err(VerifyFailure::ZeroXor { set: idx });
                }
            }
            0
        }
        VerifyMode::Fooling => {
            let length = a.length();
            if length >= 64 || (1u64 << length) > budget || family.width() > 24 {
                return Err(VerifyFailure::Budget { length, budget });
            }
            let failures = map_indexed(family.len(), |idx| check_set(a, &family.sets()[idx], idx));
            if let Some(fail) = failures.into_iter().flatten().next() {
                return Err(fail);
            }
            1u64 << length
        }
    };
    Ok(FoolingCertificate { family: family.clone(), mode, checked_seed_count })
}

/// Walks all seeds in Gray-code order, keeping the pattern `X|_e` as a bit
/// mask (bit `t` is `X_{e[t]}`) and counting how often each occurs.
fn check_set(a: &Code, e: &[usize], idx: usize) -> Option<VerifyFailure> {
    let w = e.len();
    let length = a.length();
    let columns: Vec<u64> = (0..length)
        .map(|l| e.iter().enumerate().fold(0u64, |m, (t, &i)| m | ((a.vector(i).get(l) as u64) << t)))
        .collect();
    let mut counts = alloc::vec![0u64; 1 << w];
    let mut pattern = 0u64;
    counts[0] = 1;
    for g in 1u64..(1u64 << length) {
        pattern ^= columns[g.trailing_zeros() as usize];
        counts[pattern as usize] += 1;
    }
    let total = 1u64 << length;
    // Lexicographic order with X_{e[0]} most significant.
    for lex in 0..(1u64 << w) {
        let mask = (0..w).fold(0u64, |m, t| m | (((lex >> (w - 1 - t)) & 1) << t));
        let count = counts[mask as usize];
        if count << w < total {
            let pattern = (0..w).map(|t| (mask >> t) & 1 == 1).collect();
            return Some(VerifyFailure::Pattern { set: idx, pattern, count, expected_times_2w: total });
        }
    }
    None
}

/// `Omega^A` fools `e` iff the vectors `A(i), i in e` are linearly independent.
pub fn fools_by_rank(a: &Code, e: &[usize]) -> bool {
    let mut basis = EchelonBasis::new();
    e.iter().all(|&i| basis.insert(a.vector(i).clone()).unwrap_or(false))
}
