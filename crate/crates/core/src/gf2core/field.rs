use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Low coefficients (the `x^s` term omitted) of the fixed irreducible
/// modulus for GF(2^s), `s = 1..=63`: the trinomial `x^s + x^a + 1` with the
/// smallest `a` when one exists, otherwise the lexicographically smallest
/// pentanomial.
pub const IRREDUCIBLE_LOW: [u64; 63] = [
    0x1, 0x3, 0x3, 0x3, 0x5, 0x3, 0x3, 0x1b, 0x3, 0x9, 0x5, 0x9, 0x1b, 0x21, 0x3, 0x2b, 0x9, 0x9, 0x27, 0x9, 0x5, 0x3,
    0x21, 0x1b, 0x9, 0x1b, 0x27, 0x3, 0x5, 0x3, 0x9, 0x8d, 0x401, 0x81, 0x5, 0x201, 0x53, 0x63, 0x11, 0x39, 0x9, 0x81,
    0x59, 0x21, 0x1b, 0x3, 0x21, 0x2d, 0x201, 0x1d, 0x4b, 0x9, 0x47, 0x201, 0x81, 0x95, 0x11, 0x80001, 0x95, 0x3, 0x27,
    0x20000001, 0x3,
];

pub const MAX_FIELD_EXP: u8 = 63;

/// GF(2^s) in polynomial basis; elements are `u64` with bit `t` the
/// coefficient of `x^t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Field {
    s: u8,
    modulus_low: u64,
}

impl Field {
    pub fn new(s: u8) -> Result<Self> {
        if s == 0 || s > MAX_FIELD_EXP {
            return Err(Error::FieldExponent(s));
        }
        Ok(Self { s, modulus_low: IRREDUCIBLE_LOW[s as usize - 1] })
    }

    pub fn exponent(&self) -> u8 {
        self.s
    }

    pub fn order(&self) -> u64 {
        1u64 << self.s
    }

    pub fn mask(&self) -> u64 {
        (1u64 << self.s) - 1
    }

    /// Full modulus polynomial including the leading term.
    pub fn modulus(&self) -> u128 {
        (1u128 << self.s) | self.modulus_low as u128
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        debug_assert!(a <= self.mask() && b <= self.mask());
        let mut prod: u128 = 0;
        let mut x = a as u128;
        let mut y = b;
        while y != 0 {
            if y & 1 == 1 {
                prod ^= x;
            }
            x <<= 1;
            y >>= 1;
        }
        self.reduce(prod)
    }

    fn reduce(&self, mut v: u128) -> u64 {
        let s = self.s as u32;
        let m = self.modulus();
        while v >> s != 0 {
            let top = 127 - v.leading_zeros();
            v ^= m << (top - s);
        }
        v as u64
    }

    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let mut base = a;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via `a^(2^s - 2)`.
    pub fn inv(&self, a: u64) -> Option<u64> {
        (a != 0).then(|| self.pow(a, self.order() - 2))
    }

    pub fn elem(&self, value: u64) -> Result<FieldElem> {
        FieldElem::new(value, self.s)
    }
}

/// An element of GF(2^s) tagged with its field exponent.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElem {
    value: u64,
    s: u8,
}

impl FieldElem {
    pub fn new(value: u64, s: u8) -> Result<Self> {
        let f = Field::new(s)?;
        if value > f.mask() {
            return Err(Error::Parameter(alloc::format!("{value} is not an element of GF(2^{s})")));
        }
        Ok(Self { value, s })
    }

    pub fn zero(s: u8) -> Result<Self> {
        Self::new(0, s)
    }

    pub fn one(s: u8) -> Result<Self> {
        Self::new(1, s)
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn exponent(&self) -> u8 {
        self.s
    }

    pub fn field(&self) -> Field {
        Field::new(self.s).expect("validated at construction")
    }

    fn same_field(&self, other: &FieldElem) -> Result<()> {
        if self.s != other.s {
            return Err(Error::FieldMismatch(self.s, other.s));
        }
        Ok(())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: FieldElem) -> Result<FieldElem> {
        self.same_field(&other)?;
        Ok(Self { value: self.value ^ other.value, s: self.s })
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, other: FieldElem) -> Result<FieldElem> {
        field_mul(self, other)
    }

    pub fn pow(self, e: u64) -> FieldElem {
        Self { value: self.field().pow(self.value, e), s: self.s }
    }

    pub fn inv(self) -> Option<FieldElem> {
        self.field().inv(self.value).map(|value| Self { value, s: self.s })
    }

    /// All `2^s` elements in increasing encoding order.
    pub fn all(s: u8) -> Result<Vec<FieldElem>> {
        let f = Field::new(s)?;
        Ok((0..f.order()).map(|value| Self { value, s }).collect())
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{})[{:#x}]", self.s, self.value)
    }
}

/// Product in GF(2^s) modulo the fixed irreducible for `s`.
pub fn field_mul(a: FieldElem, b: FieldElem) -> Result<FieldElem> {
    a.same_field(&b)?;
    let f = a.field();
    Ok(FieldElem { value: f.mul(a.value, b.value), s: a.s })
}
