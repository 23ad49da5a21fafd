use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Largest supported bit depth for values in `M_b`.
pub const MAX_BITS: u32 = 30;

/// A value in `M_b` with some bits unknown. Level `l` (0 = most significant)
/// lives at bit position `b - 1 - l` of both masks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct PartialValue {
    known: u32,
    bits: u32,
}

impl PartialValue {
    pub const UNKNOWN: Self = Self { known: 0, bits: 0 };

    pub fn full(value: u32, b: u32) -> Self {
        let mask = low_mask(b);
        Self { known: mask, bits: value & mask }
    }

    pub fn from_masks(known: u32, bits: u32) -> Self {
        Self { known, bits: bits & known }
    }

    pub fn bit(b: Option<bool>) -> Self {
        match b {
            None => Self::UNKNOWN,
            Some(v) => Self { known: 1, bits: v as u32 },
        }
    }

    pub fn known_mask(&self) -> u32 {
        self.known
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn get(&self, level: u32, b: u32) -> Option<bool> {
        let pos = b - 1 - level;
        (self.known >> pos & 1 == 1).then(|| self.bits >> pos & 1 == 1)
    }

    pub fn set(&mut self, level: u32, b: u32, bit: bool) {
        let pos = b - 1 - level;
        self.known |= 1 << pos;
        if bit {
            self.bits |= 1 << pos;
        } else {
            self.bits &= !(1 << pos);
        }
    }

    pub fn is_full(&self, b: u32) -> bool {
        self.known == low_mask(b)
    }

    pub fn value(&self, b: u32) -> Option<u32> {
        self.is_full(b).then_some(self.bits)
    }

    pub fn unknown_count(&self, b: u32) -> u32 {
        b - self.known.count_ones()
    }

    /// All completions in increasing order.
    pub fn completions(&self, b: u32) -> impl Iterator<Item = u32> + '_ {
        let free = low_mask(b) & !self.known;
        let count = 1u32 << free.count_ones();
        (0..count).map(move |c| self.bits | deposit(c, free))
    }

    /// Number of completions strictly below `a`.
    pub fn count_below(&self, a: u64, b: u32) -> u64 {
        if a >= 1u64 << b {
            return 1u64 << self.unknown_count(b);
        }
        // Walk from the most significant bit; at the first position where the
        // completion goes below `a`, all lower free bits are unconstrained.
        let mut total = 0u64;
        let mut free_below = self.unknown_count(b);
        for pos in (0..b).rev() {
            let a_bit = (a >> pos) & 1 == 1;
            let is_known = self.known >> pos & 1 == 1;
            if !is_known {
                free_below -= 1;
            }
            if a_bit {
                // Choosing 0 here puts the completion below `a`.
                if !is_known || self.bits >> pos & 1 == 0 {
                    total += 1u64 << free_below;
                }
                if is_known && self.bits >> pos & 1 == 0 {
                    return total;
                }
            } else if is_known && self.bits >> pos & 1 == 1 {
                return total;
            }
        }
        total
    }
}

pub(crate) fn low_mask(b: u32) -> u32 {
    if b >= 32 {
        u32::MAX
    } else {
        (1u32 << b) - 1
    }
}

/// Scatters the low bits of `src` into the set positions of `mask`.
fn deposit(src: u32, mask: u32) -> u32 {
    let mut out = 0;
    let mut m = mask;
    let mut k = 0;
    while m != 0 {
        let pos = m.trailing_zeros();
        if (src >> k) & 1 == 1 {
            out |= 1 << pos;
        }
        m &= m - 1;
        k += 1;
    }
    out
}

/// `n` partially known values in `M_b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartialAssignment {
    b: u32,
    values: Vec<PartialValue>,
}

impl PartialAssignment {
    pub fn unknown(n: usize, b: u32) -> Result<Self> {
        check_bits(b)?;
        Ok(Self { b, values: alloc::vec![PartialValue::UNKNOWN; n] })
    }

    pub fn new(b: u32, values: Vec<PartialValue>) -> Result<Self> {
        check_bits(b)?;
        if let Some(v) = values.iter().find(|v| v.known & !low_mask(b) != 0) {
            return Err(Error::Parameter(alloc::format!("known mask {:#x} exceeds {b} bits", v.known)));
        }
        Ok(Self { b, values })
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[PartialValue] {
        &self.values
    }

    /// `X'(i, level)`.
    pub fn get(&self, i: usize, level: u32) -> Option<bool> {
        self.values[i].get(level, self.b)
    }

    pub fn set(&mut self, i: usize, level: u32, bit: bool) {
        self.values[i].set(level, self.b, bit);
    }

    /// Some `l` with every level `< l` known and every level `> l` unknown.
    pub fn graded_level(&self) -> Option<u32> {
        graded_level(&self.values, self.b)
    }

    pub fn is_graded(&self) -> bool {
        self.graded_level().is_some()
    }

    /// Graded with level `l` itself uniformly unknown.
    pub fn is_fully_graded(&self) -> bool {
        let b = self.b;
        (0..=b).any(|l| self.values.iter().all(|v| (0..b).all(|lv| v.get(lv, b).is_some() == (lv < l))))
    }
}

fn check_bits(b: u32) -> Result<()> {
    if b == 0 || b > MAX_BITS {
        return Err(Error::Parameter(alloc::format!("bit depth {b} outside 1..={MAX_BITS}")));
    }
    Ok(())
}

pub fn graded_level(values: &[PartialValue], b: u32) -> Option<u32> {
    (0..b.max(1)).find(|&l| {
        values.iter().all(|v| {
            (0..b).all(|lv| match lv.cmp(&l) {
                core::cmp::Ordering::Less => v.get(lv, b).is_some(),
                core::cmp::Ordering::Equal => true,
                core::cmp::Ordering::Greater => v.get(lv, b).is_none(),
            })
        })
    })
}
