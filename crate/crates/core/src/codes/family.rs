use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::util::normalized;

/// A list of index sets over `[0, n)`. Each set is stored sorted and without
/// repeated indices; the list itself may contain duplicate sets.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct NeighborhoodFamily {
    n: usize,
    sets: Vec<Vec<usize>>,
    width: usize,
}

impl NeighborhoodFamily {
    pub fn new(n: usize, sets: Vec<Vec<usize>>) -> Result<Self> {
        let mut out = Vec::with_capacity(sets.len());
        for set in sets {
            if let Some(&bad) = set.iter().find(|&&i| i >= n) {
                return Err(Error::OutOfRange { index: bad, bound: n });
            }
            out.push(normalized(&set));
        }
        let width = out.iter().map(Vec::len).max().unwrap_or(0);
        Ok(Self { n, sets: out, width })
    }

    pub fn empty(n: usize) -> Self {
        Self { n, sets: Vec::new(), width: 0 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    /// `n + sum |e|`.
    pub fn total_size(&self) -> usize {
        self.n + self.sets.iter().map(Vec::len).sum::<usize>()
    }

    /// Distinct nonempty sets, in order of first appearance.
    pub fn distinct_nonempty(&self) -> Vec<Vec<usize>> {
        let mut seen = alloc::collections::BTreeSet::new();
        self.sets.iter().filter(|e| !e.is_empty() && seen.insert((*e).clone())).cloned().collect()
    }

    /// Indices that occur in at least one set, ascending.
    pub fn used_indices(&self) -> Vec<usize> {
        let mut used = alloc::vec![false; self.n];
        for e in &self.sets {
            for &i in e {
                used[i] = true;
            }
        }
        (0..self.n).filter(|&i| used[i]).collect()
    }
}
