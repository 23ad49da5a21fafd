use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gf2core::BitVec;

/// `n` binary vectors `A(0..n)` of a common length `L`. The induced space
/// draws a uniform seed `y` in GF(2)^L and sets `X_i = A(i) . y`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Code {
    vectors: Vec<BitVec>,
    length: usize,
}

impl Code {
    pub fn new(length: usize, vectors: Vec<BitVec>) -> Result<Self> {
        if let Some(bad) = vectors.iter().find(|v| v.len() != length) {
            return Err(Error::Dimension { expected: length, found: bad.len() });
        }
        Ok(Self { vectors, length })
    }

    pub fn zeros(n: usize, length: usize) -> Self {
        Self { vectors: alloc::vec![BitVec::zeros(length); n], length }
    }

    pub fn n(&self) -> usize {
        self.vectors.len()
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn vector(&self, i: usize) -> &BitVec {
        &self.vectors[i]
    }

    pub fn vectors(&self) -> &[BitVec] {
        &self.vectors
    }

    /// `A(e) = XOR_{i in e} A(i)`; the zero vector for `e = {}`.
    pub fn code_xor(&self, e: &[usize]) -> Result<BitVec> {
        let mut acc = BitVec::zeros(self.length);
        for &i in e {
            let v = self.vectors.get(i).ok_or(Error::OutOfRange { index: i, bound: self.n() })?;
            acc.xor_assign(v)?;
        }
        Ok(acc)
    }

    /// `X_i = A(i) . y` for every `i`.
    pub fn expand_seed(&self, y: &BitVec) -> Result<BitVec> {
        if y.len() != self.length {
            return Err(Error::Dimension { expected: self.length, found: y.len() });
        }
        let mut x = BitVec::zeros(self.n());
        for (i, a) in self.vectors.iter().enumerate() {
            if a.dot(y)? {
                x.set(i, true);
            }
        }
        Ok(x)
    }

    /// Generator rows read as a code: row `j` of `rows` becomes bit `j` of every
    /// vector, so `expand_seed(y)` is `sum_j y_j row_j`.
    pub fn from_rows(rows: &[BitVec], n: usize) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::Dimension { expected: n, found: bad.len() });
        }
        let mut vectors = alloc::vec![BitVec::zeros(rows.len()); n];
        for (j, row) in rows.iter().enumerate() {
            for i in row.iter_ones() {
                vectors[i].set(j, true);
            }
        }
        Ok(Self { vectors, length: rows.len() })
    }

    /// Places the vectors of `inner` at the given coordinates of a code of
    /// size `n`; every other coordinate gets the zero vector.
    pub(crate) fn scatter(inner: Code, coords: &[usize], n: usize) -> Self {
        let mut out = Self::zeros(n, inner.length);
        for (v, &c) in inner.vectors.into_iter().zip(coords) {
            out.vectors[c] = v;
        }
        out
    }

    /// Appends the low `width` bits of `values[i]` to vector `i`.
    pub(crate) fn append_bits(&mut self, values: &[u64], width: usize) {
        for (v, &x) in self.vectors.iter_mut().zip(values) {
            v.push_bits(x, width);
        }
        self.length += width;
    }
}
