use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gf2core::{BitVec, Field, MAX_FIELD_EXP};
use crate::util::log2;

/// Default cap on the number of samples a space may list.
pub const DEFAULT_SAMPLE_BUDGET: u64 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SmallBiasMode {
    /// The smaller of the two constructions.
    Auto,
    Powering,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SmallBiasConstruction {
    /// Seeds `(a, c)` in GF(2^s)^2; bit `i` is `<a^{i+1}, c>`.
    Powering { s: u8 },
    /// All of `{0,1}^n`.
    Full,
}

/// A multiset of samples in `{0,1}^n` on which every `t` coordinates see each
/// pattern with probability at most `(1 + epsilon) 2^{-t}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SmallBiasSpace {
    pub n: usize,
    pub t: usize,
    pub epsilon: f64,
    pub construction: SmallBiasConstruction,
    pub samples: Vec<BitVec>,
}

/// Field size for the powering construction: the bias `n / 2^s` must be at
/// most `epsilon 2^{-t}`.
pub fn powering_exponent(n: usize, t: usize, epsilon: f64) -> u32 {
    let need = log2(n.max(1) as f64) + t as f64 + log2(1.0 / epsilon);
    (libm::ceil(need) as u32).max(1)
}

pub fn build_small_bias_space(n: usize, t: usize, epsilon: f64) -> Result<SmallBiasSpace> {
    build_small_bias_space_with(n, t, epsilon, SmallBiasMode::Auto, DEFAULT_SAMPLE_BUDGET)
}

pub fn build_small_bias_space_with(
    n: usize,
    t: usize,
    epsilon: f64,
    mode: SmallBiasMode,
    budget: u64,
) -> Result<SmallBiasSpace> {
    if t > n {
        return Err(Error::Parameter(alloc::format!("t = {t} exceeds n = {n}")));
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::Parameter("epsilon must be positive".into()));
    }
    let s = powering_exponent(n, t, epsilon);
    let powering_size = if s <= 31 { Some(1u64 << (2 * s)) } else { None };
    let full_size = if n < 63 { Some(1u64 << n) } else { None };
    let construction = match mode {
        SmallBiasMode::Full => SmallBiasConstruction::Full,
        SmallBiasMode::Powering => SmallBiasConstruction::Powering { s: s as u8 },
        SmallBiasMode::Auto => match (full_size, powering_size) {
            (Some(f), Some(p)) if f <= p => SmallBiasConstruction::Full,
            (Some(_), None) => SmallBiasConstruction::Full,
            _ => SmallBiasConstruction::Powering { s: s as u8 },
        },
    };
    let size = match construction {
        SmallBiasConstruction::Full => full_size,
        SmallBiasConstruction::Powering { .. } => powering_size,
    };
    let size = match size {
        Some(z) if z <= budget => z,
        _ => {
            return Err(Error::Budget(alloc::format!(
                "small-bias space for n = {n}, t = {t}, epsilon = {epsilon} exceeds {budget} samples"
            )))
        }
    };
    let samples = match construction {
        SmallBiasConstruction::Full => (0..size).map(|v| BitVec::from_u64(v, n)).collect(),
        SmallBiasConstruction::Powering { s } => {
            if s > MAX_FIELD_EXP {
                return Err(Error::FieldExponent(s));
            }
            powering_samples(n, Field::new(s)?)
        }
    };
    Ok(SmallBiasSpace { n, t, epsilon, construction, samples })
}

fn powering_samples(n: usize, field: Field) -> Vec<BitVec> {
    let q = field.order();
    let mut out = Vec::with_capacity((q * q) as usize);
    for a in 0..q {
        let mut powers = Vec::with_capacity(n);
        let mut acc = a;
        for _ in 0..n {
            powers.push(acc);
            acc = field.mul(acc, a);
        }
        for c in 0..q {
            let mut v = BitVec::zeros(n);
            for (i, &p) in powers.iter().enumerate() {
                if (p & c).count_ones() % 2 == 1 {
                    v.set(i, true);
                }
            }
            out.push(v);
        }
    }
    out
}

/// Exhaustive check of the defining bound over every `t`-subset; returns the
/// first offending subset and pattern (bit `k` = coordinate `subset[k]`).
pub fn check_small_bias(space: &SmallBiasSpace) -> core::result::Result<(), (Vec<usize>, u64)> {
    let t = space.t.min(space.n);
    let total = space.samples.len() as f64;
    let limit = (1.0 + space.epsilon) * total;
    let mut subset: Vec<usize> = (0..t).collect();
    loop {
        let mut counts = alloc::vec![0u64; 1 << t];
        for x in &space.samples {
            let p = subset.iter().enumerate().fold(0usize, |m, (k, &i)| m | ((x.get(i) as usize) << k));
            counts[p] += 1;
        }
        if let Some(p) = counts.iter().position(|&c| (c as f64) * libm::exp2(t as f64) > limit) {
            return Err((subset, p as u64));
        }
        // Next t-subset in lexicographic order.
        let mut k = t;
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            if subset[k] < space.n - t + k {
                subset[k] += 1;
                for l in k + 1..t {
                    subset[l] = subset[l - 1] + 1;
                }
                break;
            }
        }
    }
}
