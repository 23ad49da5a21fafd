use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::instance::LllInstance;
use super::potential::{potential_s, Potential, TreeJuntas};
use super::table::{mt_randomized, MtRun, ResamplingTable};
use super::tree::{enumerate_tail_trees, enumerate_witness_trees_with, WitnessTree, DEFAULT_TREE_BUDGET};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::juntas::{optimize_graded, JuntaConfig, JuntaSystem, PartialValue, Peo};

/// Largest size cut the search will try.
pub const MAX_TREE_SIZE: usize = 64;

#[derive(Clone, Debug)]
pub struct MtConfig {
    pub epsilon: f64,
    /// Smallest size cut to try; the search raises it until the tail weight
    /// is below 1/2.
    pub k: Option<usize>,
    /// Constant in the reference size cut `c log(mn/eps) / (eps log d)`.
    pub c_k: f64,
    /// Overrides `C = max(1, ceil(2 W / m))`.
    pub c: Option<u64>,
    /// Run even when the LLL condition fails.
    pub force: bool,
    pub tree_budget: usize,
    pub junta: JuntaConfig,
}

impl Default for MtConfig {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            k: None,
            c_k: 1.0,
            c: None,
            force: false,
            tree_budget: DEFAULT_TREE_BUDGET,
            junta: JuntaConfig::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MtOutcome {
    pub assignment: Vec<u32>,
    pub run: MtRun,
    pub table: ResamplingTable,
    pub k: usize,
    pub k_reference: usize,
    pub c: u64,
    pub cm: u64,
    pub lll_lhs: f64,
    pub small_trees: usize,
    pub tail_trees: usize,
    /// Sum of weights below the cut.
    pub small_weight: Dyadic,
    pub tail_weight: Dyadic,
    /// `C m E[S]` over uniform tables.
    pub scaled_expectation: Dyadic,
    pub potential: Potential,
}

/// `c log(mn/eps) / (eps log d)`, at least 1.
pub fn reference_size(m: usize, n: usize, d: usize, epsilon: f64, c: f64) -> usize {
    let num = libm::log(((m * n).max(2) as f64) / epsilon);
    let den = epsilon * libm::log(d.max(2) as f64);
    (libm::ceil(c * num / den) as usize).clamp(1, MAX_TREE_SIZE)
}

/// Finds a table on which no tail tree and fewer than `C m` small trees are
/// compatible, then runs Moser-Tardos on it.
pub fn deterministic_mt(inst: &LllInstance, cfg: &MtConfig) -> Result<MtOutcome> {
    if cfg.epsilon.is_nan() || cfg.epsilon <= 0.0 {
        return Err(Error::Parameter("epsilon must be positive".into()));
    }
    let lll_lhs = inst.lll_lhs(cfg.epsilon);
    if !cfg.force {
        inst.check_condition(cfg.epsilon)?;
    }
    let m = inst.m();
    let k_reference = reference_size(m, inst.n(), inst.d(), cfg.epsilon, cfg.c_k);
    let half = Dyadic::half();

    let mut k = cfg.k.unwrap_or(1).max(1);
    let (tail, tail_weight) = loop {
        if k > MAX_TREE_SIZE {
            return Err(Error::Budget(alloc::format!("tail weight stays at least 1/2 up to K = {MAX_TREE_SIZE}")));
        }
        let tail = enumerate_tail_trees(inst, k, cfg.tree_budget).map_err(|e| match e {
            Error::Budget(msg) => Error::Budget(alloc::format!("tail weight < 1/2 fails below K = {k}; {msg}")),
            other => other,
        })?;
        let w: Dyadic = tail.iter().map(|t| t.weight().clone()).sum();
        if w < half {
            break (tail, w);
        }
        k += 1;
    };
    let small = enumerate_witness_trees_with(inst, k - 1, cfg.tree_budget)?;
    let small_weight: Dyadic = small.iter().map(|t| t.weight().clone()).sum();

    let c_min = ceil_ratio(&small_weight.mul_int(2), m.max(1)).max(1);
    let c = match cfg.c {
        Some(c) if c < c_min => {
            return Err(Error::Parameter(alloc::format!("C = {c} leaves 2 W > C m; need at least {c_min}")))
        }
        Some(c) => c,
        None => c_min,
    };
    let cm = c * m.max(1) as u64;

    let juntas = TreeJuntas::new(inst, &small, &tail, k, cm)?;
    let (table, scaled_expectation) = if m == 0 {
        (ResamplingTable::zeros(inst.n(), k), Dyadic::zero())
    } else {
        let out = optimize_graded(juntas.system(), &juntas, &cfg.junta)?;
        (ResamplingTable::new(inst.n(), k, out.x)?, -out.expectation)
    };
    let bound = &small_weight + &tail_weight.mul_int(cm as i64);
    assert!(scaled_expectation <= bound, "declared bounds must dominate the exact expectation");
    if scaled_expectation >= Dyadic::from_int(cm as i64) {
        return Err(Error::Verification(alloc::format!("C m E[S] = {scaled_expectation} is not below C m = {cm}")));
    }

    let potential = potential_s(inst, &small, &tail, &table, cm)?;
    if !potential.below_one() {
        return Err(Error::Verification(alloc::format!("S(R) = {}/{} is not below 1", potential.scaled(), cm)));
    }
    let run =
        mt_randomized(inst, &table).map_err(|e| Error::Verification(alloc::format!("search table failed: {e}")))?;
    if run.log.len() as u64 >= cm.max(1) && m > 0 {
        return Err(Error::Verification(alloc::format!("{} resamplings, bound C m = {cm}", run.log.len())));
    }
    if let Some(bad) = inst.first_violated(&run.assignment) {
        return Err(Error::Verification(alloc::format!("event {bad} still holds")));
    }
    Ok(MtOutcome {
        assignment: run.assignment.clone(),
        run,
        table,
        k,
        k_reference,
        c,
        cm,
        lll_lhs,
        small_trees: small.len(),
        tail_trees: tail.len(),
        small_weight,
        tail_weight,
        scaled_expectation,
        potential,
    })
}

/// `ceil(w / m)`.
fn ceil_ratio(w: &Dyadic, m: usize) -> u64 {
    let den = BigInt::from(m) << w.denom_exp() as usize;
    num_integer::Integer::div_ceil(w.numer(), &den).to_u64().unwrap_or(u64::MAX)
}

/// `-sum_k P[B_k]` as a sum of juntas over the variables.
struct EventSum<'a>(&'a LllInstance);

impl Peo for EventSum<'_> {
    fn expectation(&self, j: usize, query: &[PartialValue]) -> Result<Dyadic> {
        let e = self.0.event(j);
        Ok(-e.oracle.probability(query, self.0.b())?)
    }
}

/// When the exact probabilities sum below 1, conditional expectations on the
/// expected number of bad events find an assignment avoiding all of them.
pub fn union_bound_assignment(inst: &LllInstance, cfg: &JuntaConfig) -> Result<Vec<u32>> {
    let total: Dyadic = inst.events().iter().map(|e| e.exact().clone()).sum();
    if total >= Dyadic::one() {
        return Err(Error::Parameter(alloc::format!("bad events have total probability {total}")));
    }
    if inst.m() == 0 {
        return Ok(alloc::vec![0; inst.n()]);
    }
    let sys = JuntaSystem::new(inst.n(), inst.b(), inst.events().iter().map(|e| e.vars.clone()).collect())?;
    let out = optimize_graded(&sys, &EventSum(inst), cfg)?;
    if let Some(bad) = inst.first_violated(&out.x) {
        return Err(Error::Verification(alloc::format!("event {bad} holds after conditional expectations")));
    }
    Ok(out.x)
}

/// Trees of the returned outcome's cut, for inspection.
pub fn cut_trees(inst: &LllInstance, k: usize, budget: usize) -> Result<(Vec<WitnessTree>, Vec<WitnessTree>)> {
    Ok((enumerate_witness_trees_with(inst, k.saturating_sub(1), budget)?, enumerate_tail_trees(inst, k, budget)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lll::instance::{ClauseEvent, Event};
    use alloc::sync::Arc;
    use alloc::vec;

    #[test]
    fn single_event_is_avoided() {
        let e = Event::new(vec![0, 1], Arc::new(ClauseEvent::new(vec![vec![0, 0]])), None);
        let inst = LllInstance::new(2, 1, vec![e]).unwrap();
        let out = deterministic_mt(&inst, &MtConfig::default()).unwrap();
        assert_ne!(out.assignment, vec![0, 0]);
        assert!(out.potential.below_one());
    }

    #[test]
    fn union_bound_avoids_everything() {
        let events =
            (0..3).map(|i| Event::new(vec![i, i + 1], Arc::new(ClauseEvent::new(vec![vec![1, 1]])), None)).collect();
        let inst = LllInstance::new(4, 1, events).unwrap();
        let x = union_bound_assignment(&inst, &JuntaConfig::default()).unwrap();
        assert!(inst.first_violated(&x).is_none());
    }

    #[test]
    fn no_events() {
        let inst = LllInstance::new(3, 2, Vec::new()).unwrap();
        let out = deterministic_mt(&inst, &MtConfig::default()).unwrap();
        assert_eq!(out.assignment, vec![0, 0, 0]);
        assert!(out.run.log.is_empty());
    }

    #[test]
    fn refuses_dense_instances() {
        let events = (0..4).map(|_| Event::new(vec![0], Arc::new(ClauseEvent::new(vec![vec![0]])), None)).collect();
        let inst = LllInstance::new(1, 1, events).unwrap();
        assert!(matches!(deterministic_mt(&inst, &MtConfig::default()), Err(Error::LllCondition { .. })));
    }

    #[test]
    fn five_uniform_cycle_two_coloring() {
        // Edges overlap consecutive ones in one vertex; d = 3.
        let n = 24;
        let events: Vec<Event> = (0..6)
            .map(|e| {
                let vars: Vec<usize> = (0..5).map(|t| (4 * e + t) % n).collect();
                Event::new(vars, Arc::new(ClauseEvent::monochromatic(5, 1)), None)
            })
            .collect();
        let inst = LllInstance::new(n, 1, events).unwrap();
        assert_eq!(inst.d(), 3);
        let out = deterministic_mt(&inst, &MtConfig { epsilon: 0.5, ..MtConfig::default() }).unwrap();
        assert!(inst.first_violated(&out.assignment).is_none());
        assert!((out.run.log.len() as u64) < out.cm);
    }
}
