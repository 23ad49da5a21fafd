use alloc::vec::Vec;

use super::instance::LllInstance;
use super::table::ResamplingTable;
use super::tree::WitnessTree;
use crate::dyadic::Dyadic;
use crate::error::Result;
use crate::juntas::{JuntaSystem, PartialValue, Peo};

/// Every node's event holds on its slice of the table.
pub fn compatible(inst: &LllInstance, tree: &WitnessTree, table: &ResamplingTable) -> Result<bool> {
    for (v, &label) in tree.labels().iter().enumerate() {
        let slice = &tree.slices()[v];
        let e = inst.event(label);
        let mut values = Vec::with_capacity(e.vars.len());
        for &i in &e.vars {
            values.push(table.get(i, slice.occurrence(i).expect("slice covers the support"))?);
        }
        if !e.oracle.holds(&values, inst.b()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `S(R) = small / (C m) + tail`, kept as integer counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Potential {
    /// Compatible trees below the size cut.
    pub small: u64,
    /// Compatible tail trees.
    pub tail: u64,
    pub cm: u64,
}

impl Potential {
    /// `C m S(R)`, an integer.
    pub fn scaled(&self) -> u128 {
        self.small as u128 + self.cm as u128 * self.tail as u128
    }

    pub fn below_one(&self) -> bool {
        self.scaled() < self.cm as u128
    }

    pub fn to_f64(&self) -> f64 {
        self.scaled() as f64 / self.cm as f64
    }
}

/// Counts compatible trees in both layers.
pub fn potential_s(
    inst: &LllInstance,
    small: &[WitnessTree],
    tail: &[WitnessTree],
    table: &ResamplingTable,
    cm: u64,
) -> Result<Potential> {
    let count = |trees: &[WitnessTree]| -> Result<u64> {
        let mut c = 0u64;
        for t in trees {
            c += compatible(inst, t, table)? as u64;
        }
        Ok(c)
    };
    Ok(Potential { small: count(small)?, tail: count(tail)?, cm: cm.max(1) })
}

/// `-C m S` as a sum of juntas over table entries: entry `(i, j)` is
/// variable `i J + j - 1`. Each tree is a junta on its slices, and its
/// oracle is the product of the node events' oracles, which read disjoint
/// variables.
pub struct TreeJuntas<'a> {
    inst: &'a LllInstance,
    trees: Vec<&'a WitnessTree>,
    coeffs: Vec<Dyadic>,
    system: JuntaSystem,
}

impl<'a> TreeJuntas<'a> {
    pub fn new(
        inst: &'a LllInstance,
        small: &'a [WitnessTree],
        tail: &'a [WitnessTree],
        columns: usize,
        cm: u64,
    ) -> Result<Self> {
        let trees: Vec<&WitnessTree> = small.iter().chain(tail).collect();
        let coeffs = small
            .iter()
            .map(|_| Dyadic::from_int(-1))
            .chain(tail.iter().map(|_| -Dyadic::from_int(cm as i64)))
            .collect();
        let supports = trees
            .iter()
            .map(|t| {
                t.labels()
                    .iter()
                    .zip(t.slices())
                    .flat_map(|(&l, s)| {
                        inst.event(l).vars.iter().map(move |&i| i * columns + s.occurrence(i).unwrap() - 1)
                    })
                    .collect()
            })
            .collect();
        let system = JuntaSystem::new(inst.n() * columns, inst.b(), supports)?;
        Ok(Self { inst, trees, coeffs, system })
    }

    pub fn system(&self) -> &JuntaSystem {
        &self.system
    }
}

impl Peo for TreeJuntas<'_> {
    fn expectation(&self, j: usize, query: &[PartialValue]) -> Result<Dyadic> {
        let mut p = self.coeffs[j].clone();
        let mut at = 0;
        for &l in self.trees[j].labels() {
            let e = self.inst.event(l);
            let len = e.vars.len();
            p = &p * &e.oracle.probability(&query[at..at + len], self.inst.b())?;
            if p.is_zero() {
                break;
            }
            at += len;
        }
        Ok(p)
    }
}
