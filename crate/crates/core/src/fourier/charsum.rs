use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::wht::butterfly;
use crate::codes::{build_unbiased_code_with, Code, NeighborhoodFamily, UnbiasedConfig};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::gf2core::BitVec;
use crate::par::argmax;
use crate::util::{log2, normalized};

/// `sum_e gamma_e chi_e(x)` over `n` bits, with repeated sets merged.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CharacterSum {
    n: usize,
    terms: BTreeMap<Vec<usize>, Dyadic>,
}

impl CharacterSum {
    pub fn new(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn add_term(&mut self, set: &[usize], weight: Dyadic) -> Result<()> {
        if let Some(&bad) = set.iter().find(|&&i| i >= self.n) {
            return Err(Error::OutOfRange { index: bad, bound: self.n });
        }
        // chi_{i} chi_{i} = 1, so an index listed twice drops out.
        let mut key = set.to_vec();
        key.sort_unstable();
        let mut reduced = Vec::with_capacity(key.len());
        for i in key {
            if reduced.last() == Some(&i) {
                reduced.pop();
            } else {
                reduced.push(i);
            }
        }
        let slot = self.terms.entry(reduced).or_default();
        *slot += &weight;
        Ok(())
    }

    /// `gamma_{}`, 0 when absent.
    pub fn constant(&self) -> Dyadic {
        self.terms.get(&Vec::new()).cloned().unwrap_or_default()
    }

    /// Nonzero terms in canonical set order.
    pub fn terms(&self) -> impl Iterator<Item = (&[usize], &Dyadic)> {
        self.terms.iter().filter(|(_, w)| !w.is_zero()).map(|(e, w)| (e.as_slice(), w))
    }

    pub fn evaluate(&self, x: &BitVec) -> Result<Dyadic> {
        if x.len() != self.n {
            return Err(Error::Dimension { expected: self.n, found: x.len() });
        }
        Ok(self
            .terms()
            .map(|(e, w)| if e.iter().filter(|&&i| x.get(i)).count() % 2 == 0 { w.clone() } else { -w })
            .sum())
    }
}

#[derive(Clone, Debug, Default)]
pub struct CharSumConfig {
    /// Seed bits fixed per step; see [`default_chunk`].
    pub chunk: Option<usize>,
    pub code: UnbiasedConfig,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharSumOutcome {
    pub x: BitVec,
    pub value: Dyadic,
    pub baseline: Dyadic,
    pub code_length: usize,
    pub chunk: usize,
}

/// `min(ceil(log2(mn) / log2 log2 max(4, mn)), 16, L)`, at least 1.
pub fn default_chunk(m: usize, n: usize, length: usize) -> usize {
    let mn = (m.max(1) * n.max(1)) as f64;
    let inner = log2(log2(if mn < 4.0 { 4.0 } else { mn }));
    let t = libm::ceil(log2(mn) / inner) as usize;
    t.clamp(1, 16).min(length.max(1))
}

pub fn maximize_character_sum(cs: &CharacterSum) -> Result<BitVec> {
    maximize_character_sum_with(cs, &CharSumConfig::default()).map(|o| o.x)
}

/// Conditional expectations over the seed of an unbiased code for the
/// nonempty sets. Under the code every unrevealed term averages to 0, so the
/// running expectation starts at `gamma_{}` and never drops.
pub fn maximize_character_sum_with(cs: &CharacterSum, cfg: &CharSumConfig) -> Result<CharSumOutcome> {
    let baseline = cs.constant();
    let sets: Vec<Vec<usize>> = cs.terms().filter(|(e, _)| !e.is_empty()).map(|(e, _)| e.to_vec()).collect();
    let weights: Vec<Dyadic> = cs.terms().filter(|(e, _)| !e.is_empty()).map(|(_, w)| w.clone()).collect();
    let family = NeighborhoodFamily::new(cs.n, sets)?;
    let (code, _) = build_unbiased_code_with(&family, &cfg.code)?;
    let length = code.length();
    let chunk = cfg.chunk.unwrap_or_else(|| default_chunk(family.len(), cs.n, length)).max(1);
    if chunk > 24 {
        return Err(Error::Budget(alloc::format!("chunk of {chunk} seed bits")));
    }

    let xors: Vec<BitVec> = family.sets().iter().map(|e| code.code_xor(e)).collect::<Result<_>>()?;
    // Terms are revealed once the seed prefix covers their highest set bit.
    let reveal: Vec<usize> = xors.iter().map(|v| v.leading_one().expect("unbiased code")).collect();
    let mut y = BitVec::zeros(length);
    let mut expectation = baseline.clone();
    let mut start = 0;
    while start < length {
        let width = chunk.min(length - start);
        let mut coeff = alloc::vec![Dyadic::zero(); 1 << width];
        for (t, v) in xors.iter().enumerate() {
            if reveal[t] < start || reveal[t] >= start + width {
                continue;
            }
            let fixed_parity = (0..start).filter(|&l| v.get(l) && y.get(l)).count() % 2 == 1;
            let mask = (0..width).fold(0usize, |m, b| m | ((v.get(start + b) as usize) << b));
            if fixed_parity {
                coeff[mask] -= &weights[t];
            } else {
                coeff[mask] += &weights[t];
            }
        }
        butterfly(&mut coeff);
        let best = argmax(&coeff).expect("nonempty chunk");
        let gained = coeff[best].clone();
        // The scores average to coeff[0] before the transform, which is 0.
        assert!(!gained.is_negative(), "conditional expectation dropped");
        expectation += &gained;
        for b in 0..width {
            y.set(start + b, (best >> b) & 1 == 1);
        }
        start += width;
    }

    let x = code.expand_seed(&y)?;
    let value = cs.evaluate(&x)?;
    assert_eq!(value, expectation, "revealed expectation must equal the final value");
    assert!(value >= baseline);
    Ok(CharSumOutcome { x, value, baseline, code_length: length, chunk })
}

/// `x` with `y_j . x = 1` for at least half of the nonzero rows, from
/// maximizing `-sum_j chi_{y_j}(x)`.
pub fn heavy_codeword(rows: &[BitVec], n: usize) -> Result<BitVec> {
    let mut cs = CharacterSum::new(n);
    for row in rows {
        if row.len() != n {
            return Err(Error::Dimension { expected: n, found: row.len() });
        }
        let support: Vec<usize> = row.iter_ones().collect();
        cs.add_term(&normalized(&support), Dyadic::from_int(-1))?;
    }
    maximize_character_sum(&cs)
}

/// Rows read off the columns of a code file: row `j` is `(A(0)_j, ..., A(n-1)_j)`.
pub fn generator_rows(code: &Code) -> Vec<BitVec> {
    (0..code.length())
        .map(|j| {
            let bits: Vec<bool> = code.vectors().iter().map(|v| v.get(j)).collect();
            BitVec::from_bools(&bits)
        })
        .collect()
}
