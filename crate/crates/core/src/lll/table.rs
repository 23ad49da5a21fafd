use alloc::vec::Vec;

use rand_core::RngCore;

use super::instance::LllInstance;
use crate::error::{Error, Result};

/// `R(i, j)` for `i < n` and `1 <= j <= columns`, values in `M_b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ResamplingTable {
    n: usize,
    columns: usize,
    values: Vec<u32>,
}

impl ResamplingTable {
    pub fn new(n: usize, columns: usize, values: Vec<u32>) -> Result<Self> {
        if columns == 0 {
            return Err(Error::Parameter("a resampling table needs at least one column".into()));
        }
        if values.len() != n * columns {
            return Err(Error::Dimension { expected: n * columns, found: values.len() });
        }
        Ok(Self { n, columns, values })
    }

    pub fn zeros(n: usize, columns: usize) -> Self {
        Self { n, columns: columns.max(1), values: alloc::vec![0; n * columns.max(1)] }
    }

    pub fn random<R: RngCore + ?Sized>(n: usize, columns: usize, b: u32, rng: &mut R) -> Self {
        let mut t = Self { n, columns: 0, values: Vec::new() };
        t.extend_random(columns.max(1), b, rng);
        t
    }

    /// Appends `more` fresh random columns, keeping the existing ones.
    pub fn extend_random<R: RngCore + ?Sized>(&mut self, more: usize, b: u32, rng: &mut R) {
        let mask = if b >= 32 { u32::MAX } else { (1u32 << b) - 1 };
        let cols = self.columns + more;
        let mut values = Vec::with_capacity(self.n * cols);
        for i in 0..self.n {
            values.extend_from_slice(&self.values[i * self.columns..(i + 1) * self.columns]);
            values.extend((0..more).map(|_| rng.next_u32() & mask));
        }
        self.values = values;
        self.columns = cols;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    /// Storage order: variable-major, column `j` of variable `i` at
    /// `i * columns + j - 1`.
    pub fn values(&self) -> &[u32] {
        &self.values
    }

    /// `R(i, column)` with 1-based columns.
    pub fn get(&self, i: usize, column: usize) -> Result<u32> {
        if column == 0 || column > self.columns {
            return Err(Error::TableExhausted { variable: i, column, columns: self.columns });
        }
        Ok(self.values[i * self.columns + column - 1])
    }

    pub fn first_column(&self) -> Vec<u32> {
        (0..self.n).map(|i| self.values[i * self.columns]).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MtRun {
    pub assignment: Vec<u32>,
    /// Resampled events in order.
    pub log: Vec<usize>,
    /// Column each variable ended on.
    pub columns_used: Vec<usize>,
}

/// Moser-Tardos driven by a table: always resample the lowest-index event
/// that holds.
pub fn mt_randomized(inst: &LllInstance, table: &ResamplingTable) -> Result<MtRun> {
    if table.n() != inst.n() {
        return Err(Error::Dimension { expected: inst.n(), found: table.n() });
    }
    let mut col = alloc::vec![1usize; inst.n()];
    let mut x = table.first_column();
    let mut log = Vec::new();
    while let Some(k) = inst.first_violated(&x) {
        let vars = &inst.event(k).vars;
        if vars.is_empty() {
            return Err(Error::Infeasible(alloc::format!("event {k} has no variables and always holds")));
        }
        for &i in vars {
            col[i] += 1;
            x[i] = table.get(i, col[i])?;
        }
        log.push(k);
    }
    Ok(MtRun { assignment: x, log, columns_used: col })
}

/// Randomized Moser-Tardos on a fresh table, doubling the column count on
/// exhaustion up to `max_entries` table entries.
pub fn solve_randomized<R: RngCore + ?Sized>(
    inst: &LllInstance,
    columns: usize,
    max_entries: usize,
    rng: &mut R,
) -> Result<(MtRun, ResamplingTable)> {
    let mut table = ResamplingTable::random(inst.n(), columns, inst.b(), rng);
    loop {
        match mt_randomized(inst, &table) {
            Ok(run) => return Ok((run, table)),
            Err(Error::TableExhausted { .. }) if inst.n() * table.columns() * 2 <= max_entries.max(1) => {
                let more = table.columns();
                table.extend_random(more, inst.b(), rng);
            }
            Err(e) => return Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lll::instance::{ClauseEvent, Event};
    use alloc::sync::Arc;
    use alloc::vec;
    use rand_core::SeedableRng;

    fn single_zero() -> LllInstance {
        LllInstance::new(1, 1, vec![Event::new(vec![0], Arc::new(ClauseEvent::new(vec![vec![0]])), None)]).unwrap()
    }

    #[test]
    fn no_events_keeps_first_column() {
        let inst = LllInstance::new(3, 2, Vec::new()).unwrap();
        let t = ResamplingTable::new(3, 2, vec![1, 0, 2, 0, 3, 0]).unwrap();
        let run = mt_randomized(&inst, &t).unwrap();
        assert_eq!(run.assignment, vec![1, 2, 3]);
        assert!(run.log.is_empty());
    }

    #[test]
    fn one_resample() {
        let inst = single_zero();
        let run = mt_randomized(&inst, &ResamplingTable::new(1, 2, vec![0, 1]).unwrap()).unwrap();
        assert_eq!(run.assignment, vec![1]);
        assert_eq!(run.log, vec![0]);
        let stuck = ResamplingTable::new(1, 2, vec![0, 0]).unwrap();
        assert_eq!(mt_randomized(&inst, &stuck), Err(Error::TableExhausted { variable: 0, column: 3, columns: 2 }));
    }

    #[test]
    fn extension_keeps_prefix() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut t = ResamplingTable::random(4, 3, 2, &mut rng);
        let before: Vec<u32> =
            (0..4).flat_map(|i| (1..=3).map(move |c| (i, c))).map(|(i, c)| t.get(i, c).unwrap()).collect();
        t.extend_random(3, 2, &mut rng);
        let after: Vec<u32> =
            (0..4).flat_map(|i| (1..=3).map(move |c| (i, c))).map(|(i, c)| t.get(i, c).unwrap()).collect();
        assert_eq!(before, after);
        assert_eq!(t.columns(), 6);
        assert!(t.values().iter().all(|&v| v < 4));
    }
}
