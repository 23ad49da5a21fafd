use alloc::vec::Vec;

use super::BitVec;
use crate::error::{Error, Result};

/// Incrementally maintained row-echelon basis over GF(2), keyed by leading bit.
#[derive(Clone, Debug, Default)]
pub struct EchelonBasis {
    rows: Vec<BitVec>,
    len: Option<usize>,
}

impl EchelonBasis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the basis; returns the remainder.
    pub fn reduce(&self, mut v: BitVec) -> BitVec {
        // Rows are kept sorted by descending leading bit, each reduced against
        // the earlier ones' pivots, so one pass suffices.
        for row in &self.rows {
            let lead = row.leading_one().expect("basis rows are nonzero");
            if lead < v.len() && v.get(lead) {
                v.xor_assign(row).expect("basis rows share one length");
            }
        }
        v
    }

    /// Inserts `v`; returns whether it was independent of the basis.
    pub fn insert(&mut self, v: BitVec) -> Result<bool> {
        match self.len {
            Some(l) if l != v.len() => return Err(Error::Dimension { expected: l, found: v.len() }),
            None => self.len = Some(v.len()),
            _ => {}
        }
        let r = self.reduce(v);
        let Some(lead) = r.leading_one() else {
            return Ok(false);
        };
        let pos = self.rows.iter().position(|row| row.leading_one().unwrap() < lead).unwrap_or(self.rows.len());
        self.rows.insert(pos, r);
        Ok(true)
    }
}

/// GF(2) rank of the span of `rows`.
pub fn rank_gf2(rows: &[BitVec]) -> Result<usize> {
    let Some(first) = rows.first() else {
        return Ok(0);
    };
    let len = first.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != len) {
        return Err(Error::Dimension { expected: len, found: bad.len() });
    }
    let mut basis = EchelonBasis::new();
    for r in rows {
        basis.insert(r.clone())?;
    }
    Ok(basis.rank())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rows(strs: &[&str]) -> Vec<BitVec> {
        strs.iter().map(|s| BitVec::from_bit_str(s).unwrap()).collect()
    }

    #[test]
    fn spec_examples() {
        assert_eq!(rank_gf2(&rows(&["100", "010", "001"])).unwrap(), 3);
        assert_eq!(rank_gf2(&rows(&["000", "000"])).unwrap(), 0);
        assert_eq!(rank_gf2(&[]).unwrap(), 0);
        assert_eq!(rank_gf2(&rows(&["110", "011", "101"])).unwrap(), 2);
        assert!(rank_gf2(&rows(&["110", "0110"])).is_err());
    }

    /// Rank via the size of the span: enumerate all 2^k combinations.
    fn span_rank(rows: &[BitVec]) -> usize {
        let mut seen = alloc::collections::BTreeSet::new();
        for mask in 0u32..(1 << rows.len()) {
            let mut acc = BitVec::zeros(rows[0].len());
            for (i, r) in rows.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    acc.xor_assign(r).unwrap();
                }
            }
            seen.insert(acc);
        }
        seen.len().trailing_zeros() as usize
    }

    proptest! {
        #[test]
        fn matches_span_enumeration(raw in proptest::collection::vec(0u64..(1 << 9), 1..9)) {
            let rs: Vec<BitVec> = raw.iter().map(|&v| BitVec::from_u64(v, 9)).collect();
            prop_assert_eq!(rank_gf2(&rs).unwrap(), span_rank(&rs));
        }

        #[test]
        fn adding_a_row_raises_rank_by_at_most_one(
            raw in proptest::collection::vec(0u64..(1 << 12), 0..10), extra in 0u64..(1 << 12)
        ) {
            let mut rs: Vec<BitVec> = raw.iter().map(|&v| BitVec::from_u64(v, 12)).collect();
            let before = rank_gf2(&rs).unwrap();
            rs.push(BitVec::from_u64(extra, 12));
            let after = rank_gf2(&rs).unwrap();
            prop_assert!(after == before || after == before + 1);
        }
    }
}
