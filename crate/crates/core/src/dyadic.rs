//! Exact dyadic rationals `n / 2^k`.
//!
//! Every conditional expectation computed by the optimizers in this crate is a
//! dyadic rational: PEO answers are probabilities over fair coin flips, and the
//! Walsh-Hadamard transform only ever divides by powers of two. Keeping them
//! exact preserves the `S(x) >= E[S]` guarantees, which a float would not.

use alloc::string::{String, ToString};
use core::cmp::Ordering;
use core::fmt;
use core::iter::Sum;
use core::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use core::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// `num / 2^exp`, kept normalized (`num` odd, or `num == 0` and `exp == 0`).
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Dyadic {
    num: BigInt,
    exp: u32,
}

impl Dyadic {
    pub fn zero() -> Self {
        Self { num: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn half() -> Self {
        Self::new(BigInt::one(), 1)
    }

    pub fn from_int(v: i64) -> Self {
        Self { num: BigInt::from(v), exp: 0 }
    }

    pub fn from_bigint(v: BigInt) -> Self {
        Self { num: v, exp: 0 }
    }

    /// `num / 2^exp`.
    pub fn new(num: impl Into<BigInt>, exp: u32) -> Self {
        let mut d = Self { num: num.into(), exp };
        d.normalize();
        d
    }

    /// `num / den` where `den` must be a power of two.
    pub fn from_ratio(num: i64, den: u64) -> Result<Self, Error> {
        if den == 0 || !den.is_power_of_two() {
            return Err(Error::NotDyadic(alloc::format!("{num}/{den}")));
        }
        Ok(Self::new(num, den.trailing_zeros()))
    }

    /// Exact conversion; every finite `f64` is dyadic.
    pub fn from_f64(v: f64) -> Result<Self, Error> {
        if !v.is_finite() {
            return Err(Error::NotDyadic(v.to_string()));
        }
        if v == 0.0 {
            return Ok(Self::zero());
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) = if raw_exp == 0 { (frac, -1074i64) } else { (frac | (1u64 << 52), raw_exp - 1075) };
        let m = BigInt::from(mant) * sign;
        Ok(if e >= 0 { Self::new(m << (e as usize), 0) } else { Self::new(m, (-e) as u32) })
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0);
        let shift = tz.min(self.exp as u64) as u32;
        if shift > 0 {
            self.num >>= shift as usize;
            self.exp -= shift;
        }
    }

    pub fn numer(&self) -> &BigInt {
        &self.num
    }

    /// Power-of-two exponent of the reduced denominator.
    pub fn denom_exp(&self) -> u32 {
        self.exp
    }

    pub fn denom(&self) -> BigInt {
        BigInt::one() << (self.exp as usize)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    /// Integral value, if the number is an integer.
    pub fn to_integer(&self) -> Option<BigInt> {
        (self.exp == 0).then(|| self.num.clone())
    }

    /// Divide by `2^k`.
    pub fn div_pow2(&self, k: u32) -> Self {
        Self::new(self.num.clone(), self.exp + k)
    }

    /// Multiply by `2^k`.
    pub fn mul_pow2(&self, k: u32) -> Self {
        if k <= self.exp {
            Self::new(self.num.clone(), self.exp - k)
        } else {
            Self::new(self.num.clone() << ((k - self.exp) as usize), 0)
        }
    }

    pub fn mul_int(&self, k: i64) -> Self {
        Self::new(&self.num * k, self.exp)
    }

    pub fn floor(&self) -> BigInt {
        self.num.div_floor(&self.denom())
    }

    pub fn ceil(&self) -> BigInt {
        -((-&self.num).div_floor(&self.denom()))
    }

    /// Compares `self` with the rational `p / q` (`q > 0`).
    pub fn cmp_ratio(&self, p: &BigInt, q: &BigInt) -> Ordering {
        debug_assert!(q.is_positive());
        (&self.num * q).cmp(&(p * self.denom()))
    }

    pub fn to_f64(&self) -> f64 {
        // Scale so huge denominators do not underflow to 0/inf.
        let bits = self.num.bits();
        if bits <= 1000 && self.exp <= 1000 {
            let n = self.num.to_f64().unwrap_or(f64::NAN);
            return n * libm::pow(2.0, -(self.exp as f64));
        }
        let drop = bits.saturating_sub(60);
        let n = (&self.num >> drop as usize).to_f64().unwrap_or(f64::NAN);
        n * libm::pow(2.0, drop as f64 - self.exp as f64)
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

fn align(a: &Dyadic, b: &Dyadic) -> (BigInt, BigInt, u32) {
    match a.exp.cmp(&b.exp) {
        Ordering::Equal => (a.num.clone(), b.num.clone(), a.exp),
        Ordering::Greater => (a.num.clone(), &b.num << ((a.exp - b.exp) as usize), a.exp),
        Ordering::Less => (&a.num << ((b.exp - a.exp) as usize), b.num.clone(), b.exp),
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = align(self, other);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> Add<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &'a Dyadic) -> Dyadic {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.clone();
        }
        let (a, b, e) = align(self, rhs);
        Dyadic::new(a + b, e)
    }
}

impl<'a> Sub<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &'a Dyadic) -> Dyadic {
        let (a, b, e) = align(self, rhs);
        Dyadic::new(a - b, e)
    }
}

impl<'a> Mul<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &'a Dyadic) -> Dyadic {
        if self.is_zero() || rhs.is_zero() {
            return Dyadic::zero();
        }
        Dyadic::new(&self.num * &rhs.num, self.exp + rhs.exp)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident, $tra:ident, $ma:ident) => {
        impl $tr for Dyadic {
            type Output = Dyadic;
            fn $m(self, rhs: Dyadic) -> Dyadic {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $m(self, rhs: &'a Dyadic) -> Dyadic {
                (&self).$m(rhs)
            }
        }
        impl $tra<&Dyadic> for Dyadic {
            fn $ma(&mut self, rhs: &Dyadic) {
                *self = (&*self).$m(rhs);
            }
        }
        impl $tra for Dyadic {
            fn $ma(&mut self, rhs: Dyadic) {
                *self = (&*self).$m(&rhs);
            }
        }
    };
}

forward_owned!(Add, add, AddAssign, add_assign);
forward_owned!(Sub, sub, SubAssign, sub_assign);
forward_owned!(Mul, mul, MulAssign, mul_assign);

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { num: -self.num, exp: self.exp }
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { num: -&self.num, exp: self.exp }
    }
}

impl Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Self {
        iter.fold(Dyadic::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Dyadic> for Dyadic {
    fn sum<I: Iterator<Item = &'a Dyadic>>(iter: I) -> Self {
        iter.fold(Dyadic::zero(), |acc, x| acc + x)
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Self {
        Self::from_int(v)
    }
}

impl fmt::Display for Dyadic {
    /// `num` or `num/den` with the denominator written out in decimal.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.denom())
        }
    }
}

impl FromStr for Dyadic {
    type Err = Error;

    /// Accepts `a`, `a/b` with `b` a power of two, and finite decimals such
    /// as `0.375` whose value is dyadic.
    fn from_str(s: &str) -> Result<Self, Error> {
        let t = s.trim();
        let bad = || Error::NotDyadic(String::from(t));
        if let Some((n, d)) = t.split_once('/') {
            let num: BigInt = n.trim().parse().map_err(|_| bad())?;
            let den: BigInt = d.trim().parse().map_err(|_| bad())?;
            if den.sign() != Sign::Plus {
                return Err(bad());
            }
            let tz = den.trailing_zeros().unwrap_or(0);
            if den != (BigInt::one() << tz as usize) {
                return Err(bad());
            }
            return Ok(Dyadic::new(num, tz as u32));
        }
        if let Some((ip, fp)) = t.split_once('.') {
            let neg = ip.trim_start().starts_with('-');
            let digits = fp.len() as u32;
            let whole: BigInt =
                if ip.is_empty() || ip == "-" { BigInt::zero() } else { ip.parse().map_err(|_| bad())? };
            let frac: BigInt = if fp.is_empty() { BigInt::zero() } else { fp.parse().map_err(|_| bad())? };
            let ten_pow = num_traits::pow(BigInt::from(10), digits as usize);
            let mut total = whole.abs() * &ten_pow + frac;
            if neg {
                total = -total;
            }
            // total / 10^digits = total / (2^digits * 5^digits)
            let five_pow = num_traits::pow(BigInt::from(5), digits as usize);
            let (q, r) = total.div_rem(&five_pow);
            if !r.is_zero() {
                return Err(bad());
            }
            return Ok(Dyadic::new(q, digits));
        }
        let num: BigInt = t.parse().map_err(|_| bad())?;
        Ok(Dyadic::from_bigint(num))
    }
}
