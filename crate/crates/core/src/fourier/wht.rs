use alloc::vec::Vec;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// Fourier coefficients `gamma_f` of a function on `w` bits, indexed by the
/// subset mask `f` (bit `t` stands for variable `t`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectrumTable {
    arity: u32,
    coeffs: Vec<Dyadic>,
}

impl SpectrumTable {
    pub fn arity(&self) -> u32 {
        self.arity
    }

    pub fn coeffs(&self) -> &[Dyadic] {
        &self.coeffs
    }

    pub fn coeff(&self, mask: usize) -> &Dyadic {
        &self.coeffs[mask]
    }

    pub fn into_coeffs(self) -> Vec<Dyadic> {
        self.coeffs
    }
}

/// Unnormalized butterfly: `out[f] = sum_y (-1)^{|f & y|} in[y]`.
pub(crate) fn butterfly(values: &mut [Dyadic]) {
    let n = values.len();
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let a = core::mem::take(&mut values[i]);
                let b = core::mem::take(&mut values[i + h]);
                values[i + h] = &a - &b;
                values[i] = a + b;
            }
        }
        h *= 2;
    }
}

fn arity_of(len: usize) -> Result<u32> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::Parameter(alloc::format!("table length {len} is not a power of two")));
    }
    Ok(len.trailing_zeros())
}

/// `gamma_f = 2^{-w} sum_y chi_f(y) g(y)`, where entry `y` of the table has
/// bit `t` equal to variable `t`.
pub fn wht(table: &[Dyadic]) -> Result<SpectrumTable> {
    let arity = arity_of(table.len())?;
    let mut coeffs = table.to_vec();
    butterfly(&mut coeffs);
    for c in &mut coeffs {
        *c = c.div_pow2(arity);
    }
    Ok(SpectrumTable { arity, coeffs })
}

/// `g(y) = sum_f gamma_f chi_f(y)`.
pub fn inverse_wht(spectrum: &SpectrumTable) -> Vec<Dyadic> {
    let mut values = spectrum.coeffs.clone();
    butterfly(&mut values);
    values
}
