use alloc::vec::Vec;

use super::smallbias::{build_small_bias_space_with, SmallBiasMode};
use crate::codes::NeighborhoodFamily;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::par::{argmin, map_indexed};

/// Disjoint parts covering `[n]`, each meeting every declared set in at most
/// `t_cap` indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariablePartition {
    pub parts: Vec<Vec<usize>>,
    pub t_cap: usize,
}

impl VariablePartition {
    pub fn single(n: usize, t_cap: usize) -> Self {
        Self { parts: alloc::vec![(0..n).collect()], t_cap }
    }

    /// Largest `|f ∩ T_k|` over the family.
    pub fn max_load(&self, family: &NeighborhoodFamily) -> usize {
        let mut part_of = alloc::vec![0usize; family.n()];
        for (k, p) in self.parts.iter().enumerate() {
            for &v in p {
                part_of[v] = k;
            }
        }
        let mut load = alloc::vec![0usize; self.parts.len()];
        let mut best = 0;
        for f in family.sets() {
            for &v in f {
                load[part_of[v]] += 1;
            }
            for &v in f {
                best = best.max(load[part_of[v]]);
                load[part_of[v]] = 0;
            }
        }
        best
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitMethod {
    /// Best sample of a small-bias space.
    Sampled { samples: u64 },
    /// Bit-by-bit conditional expectations when the space is over budget.
    Conditional,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionReport {
    /// `Q` before the first round and after each round.
    pub potential: Vec<u128>,
    pub methods: Vec<SplitMethod>,
}

/// Largest small-bias space the partitioner scores each round; bigger spaces
/// fall back to conditional expectations.
pub const PARTITION_SAMPLE_BUDGET: u64 = 1 << 12;

#[derive(Clone, Debug)]
pub struct PartitionConfig {
    pub epsilon: f64,
    pub sample_budget: u64,
    pub mode: SmallBiasMode,
    pub max_rounds: Option<usize>,
    /// Skip small-bias sampling and always split by conditional expectations.
    pub conditional_only: bool,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            sample_budget: PARTITION_SAMPLE_BUDGET,
            mode: SmallBiasMode::Auto,
            max_rounds: None,
            conditional_only: false,
        }
    }
}

fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// `Q = sum_{f,k} C(|f ∩ T_k|, t_cap + 1)`, zero exactly when every load is
/// at most `t_cap`.
fn potential(sets: &[Vec<usize>], label: &[u64], r: usize) -> u128 {
    let mut total = 0u128;
    let mut labels: Vec<u64> = Vec::new();
    for f in sets {
        labels.clear();
        labels.extend(f.iter().map(|&v| label[v]));
        labels.sort_unstable();
        let mut i = 0;
        while i < labels.len() {
            let mut j = i;
            while j < labels.len() && labels[j] == labels[i] {
                j += 1;
            }
            total += binom(j - i, r);
            i = j;
        }
    }
    total
}

/// `E[C(a + Bin(u, 1/2), r)] = sum_i C(a, r - i) C(u, i) 2^{-i}`.
fn expected_binom(a: usize, u: usize, r: usize) -> Dyadic {
    (0..=r.min(u)).map(|i| Dyadic::new(num_bigint::BigInt::from(binom(a, r - i) * binom(u, i)), i as u32)).sum()
}

pub fn partition_variables(family: &NeighborhoodFamily, t_cap: usize) -> Result<VariablePartition> {
    partition_variables_with(family, t_cap, &PartitionConfig::default()).map(|(p, _)| p)
}

pub fn partition_variables_with(
    family: &NeighborhoodFamily,
    t_cap: usize,
    cfg: &PartitionConfig,
) -> Result<(VariablePartition, PartitionReport)> {
    if t_cap == 0 {
        return Err(Error::Parameter("t_cap must be at least 1".into()));
    }
    let n = family.n();
    if family.width() <= t_cap {
        return Ok((
            VariablePartition::single(n, t_cap),
            PartitionReport { potential: alloc::vec![0], methods: Vec::new() },
        ));
    }
    let sets = family.sets();
    let r = t_cap + 1;
    let mut label = alloc::vec![0u64; n];
    let mut q = potential(sets, &label, r);
    let mut report = PartitionReport { potential: alloc::vec![q], methods: Vec::new() };
    // Each round shrinks Q by at least 3/4 under either split rule.
    let max_rounds = cfg
        .max_rounds
        .unwrap_or_else(|| (libm::ceil(libm::log((q + 1) as f64) / libm::log(4.0 / 3.0)) as usize + 1).min(62));

    let space = if cfg.conditional_only {
        None
    } else {
        build_small_bias_space_with(n, r.min(n), cfg.epsilon, cfg.mode, cfg.sample_budget).ok()
    };
    let mut rounds = 0;
    while q > 0 {
        if rounds >= max_rounds {
            return Err(Error::Infeasible(alloc::format!(
                "partition potential still {q} after {rounds} rounds with t_cap = {t_cap}"
            )));
        }
        let bits: Vec<bool> = match &space {
            Some(space) => {
                let scores = map_indexed(space.samples.len(), |s| {
                    let y = &space.samples[s];
                    let next: Vec<u64> = (0..n).map(|v| 2 * label[v] + y.get(v) as u64).collect();
                    potential(sets, &next, r)
                });
                let best = argmin(&scores).expect("space is nonempty");
                report.methods.push(SplitMethod::Sampled { samples: space.samples.len() as u64 });
                space.samples[best].iter().collect()
            }
            None => {
                report.methods.push(SplitMethod::Conditional);
                conditional_split(sets, &label, n, r)
            }
        };
        for v in 0..n {
            label[v] = 2 * label[v] + bits[v] as u64;
        }
        compact(&mut label);
        let next = potential(sets, &label, r);
        assert!(next <= q, "partition potential increased: {q} -> {next}");
        q = next;
        report.potential.push(q);
        rounds += 1;
    }

    let parts_count = label.iter().copied().max().map_or(0, |m| m as usize + 1);
    let mut parts = alloc::vec![Vec::new(); parts_count.max(1)];
    for (v, &l) in label.iter().enumerate() {
        parts[l as usize].push(v);
    }
    let partition = VariablePartition { parts, t_cap };
    assert!(partition.max_load(family) <= t_cap);
    Ok((partition, report))
}

/// Relabels parts as `0..R` preserving order.
fn compact(label: &mut [u64]) {
    let mut distinct: Vec<u64> = label.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    for l in label.iter_mut() {
        *l = distinct.binary_search(l).unwrap() as u64;
    }
}

/// Fixes the split bit of each variable in index order, keeping the exact
/// conditional expectation of the next `Q` no larger than its mean.
fn conditional_split(sets: &[Vec<usize>], label: &[u64], n: usize, r: usize) -> Vec<bool> {
    // For every (set, part) pair: counts on side 0, side 1, and undecided.
    let mut pair_of: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    let mut counts: Vec<[usize; 3]> = Vec::new();
    for f in sets {
        let mut seen: Vec<(u64, usize)> = Vec::new();
        for &v in f {
            let id = match seen.iter().find(|(l, _)| *l == label[v]) {
                Some(&(_, id)) => id,
                None => {
                    counts.push([0, 0, 0]);
                    seen.push((label[v], counts.len() - 1));
                    counts.len() - 1
                }
            };
            counts[id][2] += 1;
            pair_of[v].push(id);
        }
    }
    let score = |c: &[usize; 3]| &expected_binom(c[0], c[2], r) + &expected_binom(c[1], c[2], r);
    let mut bits = alloc::vec![false; n];
    for v in 0..n {
        let mut delta = [Dyadic::zero(), Dyadic::zero()];
        for side in 0..2 {
            for &id in &pair_of[v] {
                let mut c = counts[id];
                c[2] -= 1;
                c[side] += 1;
                delta[side] += &score(&c);
            }
        }
        let side = if delta[1] < delta[0] { 1 } else { 0 };
        bits[v] = side == 1;
        for &id in &pair_of[v] {
            counts[id][2] -= 1;
            counts[id][side] += 1;
        }
    }
    bits
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn narrow_families_stay_whole() {
        let fam = NeighborhoodFamily::new(5, vec![vec![0, 1], vec![2, 3, 4]]).unwrap();
        assert_eq!(partition_variables(&fam, 3).unwrap(), VariablePartition::single(5, 3));
        let empty = NeighborhoodFamily::empty(4);
        assert_eq!(partition_variables(&empty, 1).unwrap().parts.len(), 1);
        assert!(partition_variables(&fam, 0).is_err());
    }

    #[test]
    fn eight_into_halves() {
        let fam = NeighborhoodFamily::new(8, vec![(0..8).collect()]).unwrap();
        let (p, report) = partition_variables_with(&fam, 4, &PartitionConfig::default()).unwrap();
        assert_eq!(p.parts.len(), 2);
        assert!(p.parts.iter().all(|part| part.len() == 4));
        assert_eq!(report.potential, vec![binom(8, 5), 0]);
    }

    #[test]
    fn conditional_split_meets_cap() {
        let sets: Vec<Vec<usize>> = (0..6).map(|k| (k * 3..k * 3 + 12).map(|v| v % 30).collect()).collect();
        let fam = NeighborhoodFamily::new(30, sets).unwrap();
        let cfg = PartitionConfig { conditional_only: true, ..PartitionConfig::default() };
        for t_cap in 1..=5 {
            let (p, report) = partition_variables_with(&fam, t_cap, &cfg).unwrap();
            assert!(p.max_load(&fam) <= t_cap);
            assert!(report.potential.windows(2).all(|w| w[1] <= w[0]));
            let mut all: Vec<usize> = p.parts.concat();
            all.sort_unstable();
            assert_eq!(all, (0..30).collect::<Vec<_>>());
        }
    }

    #[test]
    fn expected_binomial_matches_enumeration() {
        for a in 0..5 {
            for u in 0..6 {
                for r in 0..5 {
                    let brute: u128 = (0..1u32 << u).map(|m| binom(a + m.count_ones() as usize, r)).sum();
                    assert_eq!(expected_binom(a, u, r), Dyadic::new(num_bigint::BigInt::from(brute), u as u32));
                }
            }
        }
    }
}
