use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand_core::RngCore;

use super::instance::LllInstance;
use super::table::solve_randomized;
use super::tree::{build_slices, witness_tree_capped, TreeShape, WitnessTree};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct WtlReport {
    pub trials: u64,
    /// Runs in which the tree appeared at least once.
    pub appearances: u64,
    pub frequency: f64,
    pub weight: f64,
    /// Binomial standard deviation at the bound.
    pub sigma: f64,
    pub proper: bool,
    pub violated: bool,
}

impl WtlReport {
    fn new(trials: u64, appearances: u64, weight: f64, proper: bool) -> Self {
        let frequency = appearances as f64 / trials as f64;
        let sigma = libm::sqrt(weight * (1.0 - weight).max(0.0) / trials as f64);
        Self { trials, appearances, frequency, weight, sigma, proper, violated: frequency > weight + 4.0 * sigma }
    }
}

/// Runs randomized Moser-Tardos `trials` times and counts the runs in which
/// `tau` is the witness tree of some step.
pub fn check_wtl_empirical<R: RngCore + ?Sized>(
    inst: &LllInstance,
    tau: &TreeShape,
    trials: u64,
    rng: &mut R,
) -> Result<WtlReport> {
    Ok(check_wtl_many(inst, core::slice::from_ref(tau), trials, rng)?.remove(0))
}

/// One report per tree, all from the same runs.
pub fn check_wtl_many<R: RngCore + ?Sized>(
    inst: &LllInstance,
    taus: &[TreeShape],
    trials: u64,
    rng: &mut R,
) -> Result<Vec<WtlReport>> {
    if trials == 0 {
        return Err(Error::Parameter("at least one trial".into()));
    }
    let trees: Vec<Option<WitnessTree>> =
        taus.iter().map(|t| build_slices(inst, t).ok().filter(|t| t.size() > 0)).collect();
    let cap = trees.iter().flatten().map(WitnessTree::size).max().unwrap_or(0);
    let mut appearances = alloc::vec![0u64; taus.len()];
    if cap > 0 {
        for _ in 0..trials {
            let (run, _) = solve_randomized(inst, 8, 1 << 24, rng)?;
            let seen: BTreeSet<WitnessTree> =
                (0..run.log.len()).filter_map(|t| witness_tree_capped(inst, &run.log, t, cap)).collect();
            for (k, tree) in trees.iter().enumerate() {
                if tree.as_ref().is_some_and(|t| seen.contains(t)) {
                    appearances[k] += 1;
                }
            }
        }
    }
    Ok(trees
        .iter()
        .zip(appearances)
        .map(|(t, a)| match t {
            Some(t) => WtlReport::new(trials, a, t.weight().to_f64(), true),
            None => WtlReport::new(trials, 0, 0.0, false),
        })
        .collect())
}
