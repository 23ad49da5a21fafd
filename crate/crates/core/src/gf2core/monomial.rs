use alloc::vec::Vec;

use super::field::FieldElem;
use crate::error::{Error, Result};

/// Exponent vector of a monomial `z_1^u_1 ... z_k^u_k` with every `u_j <= d`.
///
/// Indices map to exponent vectors in mixed radix `d + 1` with `u_1` least
/// significant, so index 0 is the constant monomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MonomialIndex {
    exponents: Vec<u32>,
    degree_cap: u32,
}

impl MonomialIndex {
    pub fn from_index(mut index: u64, k: usize, degree_cap: u32) -> Result<Self> {
        let radix = degree_cap as u64 + 1;
        let mut exponents = Vec::with_capacity(k);
        for _ in 0..k {
            exponents.push((index % radix) as u32);
            index /= radix;
        }
        if index != 0 {
            return Err(Error::Parameter(alloc::format!("monomial index exceeds (d+1)^k with d={degree_cap}, k={k}")));
        }
        Ok(Self { exponents, degree_cap })
    }

    pub fn from_exponents(exponents: Vec<u32>, degree_cap: u32) -> Result<Self> {
        if let Some(&u) = exponents.iter().find(|&&u| u > degree_cap) {
            return Err(Error::Parameter(alloc::format!("exponent {u} exceeds cap {degree_cap}")));
        }
        Ok(Self { exponents, degree_cap })
    }

    pub fn index(&self) -> u64 {
        let radix = self.degree_cap as u64 + 1;
        self.exponents.iter().rev().fold(0u64, |acc, &u| acc * radix + u as u64)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn variables(&self) -> usize {
        self.exponents.len()
    }

    pub fn degree_cap(&self) -> u32 {
        self.degree_cap
    }
}

/// `prod_j alpha_j^{u_j}`; the constant monomial evaluates to 1.
pub fn eval_monomial(mono: &MonomialIndex, alpha: &[FieldElem]) -> Result<FieldElem> {
    if alpha.len() != mono.variables() {
        return Err(Error::Dimension { expected: mono.variables(), found: alpha.len() });
    }
    let Some(first) = alpha.first() else {
        return Err(Error::Parameter("cannot infer the field of an empty point".into()));
    };
    let s = first.exponent();
    let mut acc = FieldElem::one(s)?;
    for (&a, &u) in alpha.iter().zip(mono.exponents()) {
        acc = acc.mul(a.pow(u as u64))?;
    }
    Ok(acc)
}
