use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::juntas::{robp_expectation, PartialValue, Robp, MAX_BITS};

/// A bad event on `arity` variables of `M_b`, with an exact evaluator and a
/// partial-expectations oracle.
pub trait BadEvent: Send + Sync + fmt::Debug {
    /// Rejects shapes the event cannot handle.
    fn validate(&self, arity: usize, b: u32) -> Result<()>;

    fn holds(&self, values: &[u32], b: u32) -> bool;

    /// `P[event]` when each value is drawn uniformly from its completions.
    fn probability(&self, query: &[PartialValue], b: u32) -> Result<Dyadic>;
}

fn consistent(pv: &PartialValue, value: u32) -> bool {
    value & pv.known_mask() == pv.bits()
}

/// Truth table over the support values; entry `sum_t v_t 2^{b t}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableEvent {
    pub table: Vec<bool>,
}

impl BadEvent for TableEvent {
    fn validate(&self, arity: usize, b: u32) -> Result<()> {
        let bits = arity * b as usize;
        if bits > 24 {
            return Err(Error::Budget(alloc::format!("table event over {bits} bits")));
        }
        if self.table.len() != 1 << bits {
            return Err(Error::Dimension { expected: 1 << bits, found: self.table.len() });
        }
        Ok(())
    }

    fn holds(&self, values: &[u32], b: u32) -> bool {
        let idx = values.iter().enumerate().fold(0usize, |acc, (t, &v)| acc | ((v as usize) << (b as usize * t)));
        self.table[idx]
    }

    fn probability(&self, query: &[PartialValue], b: u32) -> Result<Dyadic> {
        let mut hits = 0u64;
        let mut free = 0u32;
        let mut idx = alloc::vec![0u32; query.len()];
        let choices: Vec<Vec<u32>> = query.iter().map(|q| q.completions(b).collect()).collect();
        for q in query {
            free += q.unknown_count(b);
        }
        // Odometer over the completions of every coordinate.
        let mut pos = alloc::vec![0usize; query.len()];
        loop {
            for t in 0..query.len() {
                idx[t] = choices[t][pos[t]];
            }
            hits += self.holds(&idx, b) as u64;
            let mut t = 0;
            while t < query.len() {
                pos[t] += 1;
                if pos[t] < choices[t].len() {
                    break;
                }
                pos[t] = 0;
                t += 1;
            }
            if t == query.len() {
                break;
            }
        }
        Ok(Dyadic::new(hits, free))
    }
}

/// Holds iff the values equal one of the forbidden patterns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClauseEvent {
    forbidden: Vec<Vec<u32>>,
}

impl ClauseEvent {
    pub fn new(mut forbidden: Vec<Vec<u32>>) -> Self {
        forbidden.sort();
        forbidden.dedup();
        Self { forbidden }
    }

    /// All values equal: the monochromatic event for `c = 2^b` colors.
    pub fn monochromatic(arity: usize, b: u32) -> Self {
        Self::new((0..1u32 << b).map(|v| alloc::vec![v; arity]).collect())
    }

    pub fn forbidden(&self) -> &[Vec<u32>] {
        &self.forbidden
    }
}

impl BadEvent for ClauseEvent {
    fn validate(&self, arity: usize, b: u32) -> Result<()> {
        for p in &self.forbidden {
            if p.len() != arity {
                return Err(Error::Dimension { expected: arity, found: p.len() });
            }
            if p.iter().any(|&v| b < 32 && v >> b != 0) {
                return Err(Error::Parameter(alloc::format!("pattern {p:?} has values outside M_{b}")));
            }
        }
        Ok(())
    }

    fn holds(&self, values: &[u32], _b: u32) -> bool {
        self.forbidden.binary_search_by(|p| p.as_slice().cmp(values)).is_ok()
    }

    fn probability(&self, query: &[PartialValue], b: u32) -> Result<Dyadic> {
        let free: u32 = query.iter().map(|q| q.unknown_count(b)).sum();
        let hits = self.forbidden.iter().filter(|p| p.iter().zip(query).all(|(&v, q)| consistent(q, v))).count();
        Ok(Dyadic::new(hits as u64, free))
    }
}

/// Counts the coordinates whose value falls in `[lo_t, hi_t)`; holds iff the
/// count is marked bad.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountEvent {
    pub ranges: Vec<(u64, u64)>,
    /// `bad[c]` for `c = 0..=arity`.
    pub bad: Vec<bool>,
}

impl CountEvent {
    /// `[#{t : x_t = target_t} >= threshold]`.
    pub fn threshold(targets: &[u32], threshold: usize) -> Self {
        let ranges = targets.iter().map(|&v| (v as u64, v as u64 + 1)).collect();
        let bad = (0..=targets.len()).map(|c| c >= threshold).collect();
        Self { ranges, bad }
    }

    /// Exact distribution of the count.
    pub fn count_distribution(&self, query: &[PartialValue], b: u32) -> Vec<Dyadic> {
        let mut dist = alloc::vec![Dyadic::one()];
        for (q, &(lo, hi)) in query.iter().zip(&self.ranges) {
            let inside = q.count_below(hi, b) - q.count_below(lo, b);
            let p = Dyadic::new(inside, q.unknown_count(b));
            let miss = &Dyadic::one() - &p;
            let mut next = alloc::vec![Dyadic::zero(); dist.len() + 1];
            for (c, w) in dist.iter().enumerate() {
                if w.is_zero() {
                    continue;
                }
                next[c] += &(w * &miss);
                next[c + 1] += &(w * &p);
            }
            dist = next;
        }
        dist
    }
}

impl BadEvent for CountEvent {
    fn validate(&self, arity: usize, _b: u32) -> Result<()> {
        if self.ranges.len() != arity {
            return Err(Error::Dimension { expected: arity, found: self.ranges.len() });
        }
        if self.bad.len() != arity + 1 {
            return Err(Error::Dimension { expected: arity + 1, found: self.bad.len() });
        }
        Ok(())
    }

    fn holds(&self, values: &[u32], _b: u32) -> bool {
        let c = values.iter().zip(&self.ranges).filter(|(&v, &(lo, hi))| (lo..hi).contains(&(v as u64))).count();
        self.bad[c]
    }

    fn probability(&self, query: &[PartialValue], b: u32) -> Result<Dyadic> {
        let dist = self.count_distribution(query, b);
        Ok(dist.iter().zip(&self.bad).filter(|(_, &bad)| bad).map(|(w, _)| w).sum())
    }
}

/// A 0/1-valued read-once branching program over single bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RobpEvent {
    pub program: Robp,
}

impl BadEvent for RobpEvent {
    fn validate(&self, arity: usize, b: u32) -> Result<()> {
        if b != 1 {
            return Err(Error::Parameter("branching-program events need b = 1".into()));
        }
        if self.program.vars() != arity {
            return Err(Error::Dimension { expected: arity, found: self.program.vars() });
        }
        if self.program.sinks().iter().any(|s| !s.is_zero() && *s != Dyadic::one()) {
            return Err(Error::Parameter("branching-program event sinks must be 0 or 1".into()));
        }
        Ok(())
    }

    fn holds(&self, values: &[u32], _b: u32) -> bool {
        let bools: Vec<bool> = values.iter().map(|&v| v != 0).collect();
        !self.program.eval(&crate::gf2core::BitVec::from_bools(&bools)).is_zero()
    }

    fn probability(&self, query: &[PartialValue], _b: u32) -> Result<Dyadic> {
        let q: Vec<Dyadic> = query
            .iter()
            .map(|v| match v.get(0, 1) {
                None => Dyadic::half(),
                Some(true) => Dyadic::one(),
                Some(false) => Dyadic::zero(),
            })
            .collect();
        robp_expectation(&self.program, &q)
    }
}

/// One bad event `B` with its support `Y_B` and declared bound `p_B`.
#[derive(Clone, Debug)]
pub struct Event {
    pub vars: Vec<usize>,
    pub oracle: Arc<dyn BadEvent>,
    pub p_bound: Dyadic,
    declared: Option<Dyadic>,
    exact: Dyadic,
}

impl Event {
    pub fn new(vars: Vec<usize>, oracle: Arc<dyn BadEvent>, p_bound: Option<Dyadic>) -> Self {
        Self { vars, oracle, p_bound: p_bound.clone().unwrap_or_default(), declared: p_bound, exact: Dyadic::zero() }
    }

    /// Exact `P[B]` under uniform values (set once the instance is built).
    pub fn exact(&self) -> &Dyadic {
        &self.exact
    }
}

#[derive(Clone, Debug)]
pub struct LllInstance {
    n: usize,
    b: u32,
    events: Vec<Event>,
    neighbors: Vec<Vec<usize>>,
    by_var: Vec<Vec<usize>>,
}

impl LllInstance {
    /// Validates supports and oracles, fills in missing bounds with the exact
    /// probability, and rejects bounds below it. Small events are also checked
    /// by enumeration against their evaluator.
    pub fn new(n: usize, b: u32, mut events: Vec<Event>) -> Result<Self> {
        if b == 0 || b > MAX_BITS {
            return Err(Error::Parameter(alloc::format!("bit depth {b} outside 1..={MAX_BITS}")));
        }
        let mut by_var = alloc::vec![Vec::new(); n];
        for (k, e) in events.iter_mut().enumerate() {
            let mut sorted = e.vars.clone();
            sorted.sort_unstable();
            if let Some(&bad) = sorted.iter().find(|&&i| i >= n) {
                return Err(Error::OutOfRange { index: bad, bound: n });
            }
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Parameter(alloc::format!("event {k} repeats a variable")));
            }
            e.oracle.validate(e.vars.len(), b)?;
            let exact = e.oracle.probability(&alloc::vec![PartialValue::UNKNOWN; e.vars.len()], b)?;
            if e.vars.len() * b as usize <= 16 {
                let total = 1u64 << (e.vars.len() * b as usize);
                let mask = (1u64 << b) - 1;
                let hits = (0..total)
                    .filter(|&point| {
                        let values: Vec<u32> =
                            (0..e.vars.len()).map(|t| ((point >> (b as usize * t)) & mask) as u32).collect();
                        e.oracle.holds(&values, b)
                    })
                    .count();
                let counted = Dyadic::new(hits as u64, e.vars.len() as u32 * b);
                if counted != exact {
                    return Err(Error::Oracle(alloc::format!("event {k}: oracle says {exact}, enumeration {counted}")));
                }
            }
            e.p_bound = e.declared.clone().unwrap_or_else(|| exact.clone());
            if e.p_bound < exact {
                return Err(Error::Parameter(alloc::format!(
                    "event {k}: declared bound {} is below the exact probability {exact}",
                    e.p_bound
                )));
            }
            e.exact = exact;
            for &i in &e.vars {
                by_var[i].push(k);
            }
        }
        let neighbors = (0..events.len())
            .map(|k| {
                let mut adj: Vec<usize> = events[k].vars.iter().flat_map(|&i| by_var[i].iter().copied()).collect();
                adj.push(k);
                adj.sort_unstable();
                adj.dedup();
                adj
            })
            .collect();
        Ok(Self { n, b, events, neighbors, by_var })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn m(&self) -> usize {
        self.events.len()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn event(&self, k: usize) -> &Event {
        &self.events[k]
    }

    /// Events sharing a variable with `k`, including `k`, ascending.
    pub fn neighbors(&self, k: usize) -> &[usize] {
        &self.neighbors[k]
    }

    pub fn related(&self, a: usize, b: usize) -> bool {
        self.neighbors[a].binary_search(&b).is_ok()
    }

    pub fn events_of(&self, var: usize) -> &[usize] {
        &self.by_var[var]
    }

    /// Largest closed neighborhood.
    pub fn d(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn p_max(&self) -> Dyadic {
        self.events.iter().map(|e| e.p_bound.clone()).max().unwrap_or_default()
    }

    /// `e p d^{1 + epsilon}`.
    pub fn lll_lhs(&self, epsilon: f64) -> f64 {
        core::f64::consts::E * self.p_max().to_f64() * libm::pow(self.d() as f64, 1.0 + epsilon)
    }

    pub fn check_condition(&self, epsilon: f64) -> Result<()> {
        let lhs = self.lll_lhs(epsilon);
        if lhs > 1.0 {
            return Err(Error::LllCondition { p: self.p_max().to_f64(), d: self.d(), epsilon, lhs });
        }
        Ok(())
    }

    pub fn holds(&self, k: usize, x: &[u32]) -> bool {
        let e = &self.events[k];
        let values: Vec<u32> = e.vars.iter().map(|&i| x[i]).collect();
        e.oracle.holds(&values, self.b)
    }

    /// Lowest-index event that holds at `x`.
    pub fn first_violated(&self, x: &[u32]) -> Option<usize> {
        (0..self.m()).find(|&k| self.holds(k, x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn pv(value: Option<u32>, b: u32) -> PartialValue {
        value.map_or(PartialValue::UNKNOWN, |v| PartialValue::full(v, b))
    }

    #[test]
    fn clause_and_threshold_probabilities() {
        let both_zero = ClauseEvent::new(vec![vec![0, 0]]);
        assert_eq!(both_zero.probability(&[pv(None, 1), pv(None, 1)], 1).unwrap(), Dyadic::new(1, 2));
        assert_eq!(both_zero.probability(&[pv(Some(0), 1), pv(None, 1)], 1).unwrap(), Dyadic::half());
        let mono = ClauseEvent::monochromatic(3, 2);
        assert_eq!(mono.probability(&[pv(None, 2); 3], 2).unwrap(), Dyadic::new(1, 4));
        let th = CountEvent::threshold(&[1, 1, 1], 2);
        assert_eq!(th.probability(&[pv(None, 1); 3], 1).unwrap(), Dyadic::half());
        assert!(th.holds(&[1, 0, 1], 1));
        assert!(!th.holds(&[1, 0, 0], 1));
    }

    #[test]
    fn instance_fills_and_checks_bounds() {
        let ev = |vars: Vec<usize>, p| Event::new(vars, Arc::new(ClauseEvent::new(vec![vec![0, 0]])), p);
        let inst = LllInstance::new(3, 1, vec![ev(vec![0, 1], None), ev(vec![1, 2], Some(Dyadic::half()))]).unwrap();
        assert_eq!(inst.event(0).p_bound, Dyadic::new(1, 2));
        assert_eq!(inst.d(), 2);
        assert!(inst.related(0, 1));
        assert!(LllInstance::new(3, 1, vec![ev(vec![0, 1], Some(Dyadic::new(1, 3)))]).is_err());
        assert!(LllInstance::new(3, 1, vec![ev(vec![0, 0], None)]).is_err());
        assert_eq!(inst.first_violated(&[0, 0, 1]), Some(0));
        assert_eq!(inst.first_violated(&[1, 0, 0]), Some(1));
    }

    #[test]
    fn graded_table_event() {
        // [x_0 + x_1 >= 5] with b = 2.
        let table: Vec<bool> = (0..16).map(|i| (i & 3) + (i >> 2) >= 5).collect();
        let e = TableEvent { table };
        assert_eq!(e.probability(&[pv(None, 2), pv(None, 2)], 2).unwrap(), Dyadic::new(3, 4));
        let mut top = PartialValue::UNKNOWN;
        top.set(0, 2, true);
        assert_eq!(e.probability(&[top, pv(None, 2)], 2).unwrap(), Dyadic::new(3, 3));
    }
}
