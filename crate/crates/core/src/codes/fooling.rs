use alloc::vec::Vec;

use super::params::{shape_for, RoundShape, MAX_SEARCH_EXP};
use super::unbiased::{CodeReport, PartialEval};
use super::verify::fools_by_rank;
use super::{Code, NeighborhoodFamily};
use crate::error::{Error, Result};
use crate::gf2core::{BitVec, EchelonBasis, Field};
use crate::par::{argmin, map_indexed};
use crate::util::log2;

#[derive(Clone, Debug, Default)]
pub struct FoolingConfig {
    pub k: Option<u32>,
    pub s: Option<u8>,
    /// Abort threshold on `L`; defaults to `4 (log2 m + width)`.
    pub length_cap: Option<usize>,
}

/// Where a greedy builder stands when scoring `F_{i,j,e}`: the bits of every
/// earlier round plus the partial evaluation of the current one.
pub struct FoolingState<'a> {
    prior: &'a [BitVec],
    eval: &'a PartialEval,
}

/// Number of nonempty `f` in `e` that are zero on every earlier round and whose
/// polynomial `mu_f` vanishes identically after the current step with the
/// candidate `powers` of the variable being fixed.
///
/// The condition is GF(2)-linear in the indicator of `f`, so the count is
/// `2^{|e| - rank} - 1` for the rank of the per-index constraint vectors.
fn potential_f(state: &FoolingState<'_>, e: &[usize], powers: Option<&[u64]>) -> u64 {
    let pe = state.eval;
    let s = pe.field.exponent() as usize;
    let classes: Vec<u64> = {
        let mut c: Vec<u64> = e.iter().map(|&i| suffix(pe, i, powers.is_some())).collect();
        c.dedup();
        c
    };
    let prior_len = state.prior.first().map_or(0, BitVec::len);
    let mut basis = EchelonBasis::new();
    for &i in e {
        let mut v = state.prior[i].clone();
        let coeff = match powers {
            Some(pw) => pe.trial(i, pw),
            None => pe.prefix[i],
        };
        let slot = classes.iter().position(|&c| c == suffix(pe, i, powers.is_some())).unwrap();
        let mut tail = BitVec::zeros(s * classes.len());
        for t in 0..s {
            if (coeff >> t) & 1 == 1 {
                tail.set(slot * s + t, true);
            }
        }
        v.extend_from(&tail);
        debug_assert_eq!(v.len(), prior_len + tail.len());
        basis.insert(v).expect("constraint vectors share one length");
    }
    (1u64 << (e.len() - basis.rank())) - 1
}

/// Suffix class of `i`, either before the pending step or after it.
fn suffix(pe: &PartialEval, i: usize, after: bool) -> u64 {
    if after {
        pe.suffix_after(i)
    } else {
        let r = crate::util::pow_sat(pe.radix, pe.step);
        i as u64 / r
    }
}

/// `F_{i,j,e}` for an explicit state: `prior` holds the bits of rounds before
/// `i`, and `alpha` the values fixed so far in round `i` (`j = alpha.len()`).
/// Coordinates index `0..n` with monomials over `k` variables of degree `<= d`.
pub fn potential_f_at(prior: &[BitVec], alpha: &[u64], e: &[usize], field: Field, d: u32) -> Result<u64> {
    if e.len() >= 64 {
        return Err(Error::Parameter("sets of 64 or more indices".into()));
    }
    if let Some(&bad) = e.iter().find(|&&i| i >= prior.len()) {
        return Err(Error::OutOfRange { index: bad, bound: prior.len() });
    }
    let mut pe = PartialEval::new(field, prior.len(), d);
    for &a in alpha {
        pe.fix(a);
    }
    let mut e = e.to_vec();
    e.sort_unstable();
    e.dedup();
    Ok(potential_f(&FoolingState { prior, eval: &pe }, &e, None))
}

pub fn build_fooling_code(family: &NeighborhoodFamily) -> Result<Code> {
    build_fooling_code_with(family, &FoolingConfig::default()).map(|(c, _)| c)
}

pub fn build_fooling_code_with(family: &NeighborhoodFamily, cfg: &FoolingConfig) -> Result<(Code, CodeReport)> {
    let n = family.n();
    let sets = family.distinct_nonempty();
    let m = sets.len();
    let w = family.width();
    let length_cap = cfg.length_cap.unwrap_or_else(|| 4 * (libm::ceil(log2(m.max(1) as f64)) as usize + w).max(1));
    if m == 0 {
        let report = CodeReport {
            shape: None,
            coordinates: 0,
            max_rounds: 0,
            rounds: 0,
            length: 0,
            length_cap,
            potential: Vec::new(),
        };
        return Ok((Code::zeros(n, 0), report));
    }
    if w >= 64 {
        return Err(Error::Parameter(alloc::format!("width {w} is too large to fool")));
    }

    // Only coordinates in some set matter; this also gives n <= m w.
    let coords = family.used_indices();
    let mut local_of = alloc::vec![usize::MAX; n];
    for (l, &c) in coords.iter().enumerate() {
        local_of[c] = l;
    }
    let local: Vec<Vec<usize>> = sets.iter().map(|e| e.iter().map(|&i| local_of[i]).collect()).collect();
    let n_local = coords.len();

    let shape: RoundShape = shape_for((m * w) as f64, n_local, cfg.k, cfg.s)?;
    if shape.s > MAX_SEARCH_EXP {
        return Err(Error::Budget(alloc::format!("2^{} candidates per position", shape.s)));
    }
    let field = Field::new(shape.s)?;
    let q = field.order() as u128;
    let d = shape.d as u128;
    let max_rounds = if shape.epsilon < 1.0 {
        (((w as f64) + log2(m as f64)) / -log2(shape.epsilon)) as usize + 1
    } else {
        usize::MAX
    };

    let mut prior: Vec<BitVec> = alloc::vec![BitVec::zeros(0); n_local];
    let mut h_prev: u64 = local.iter().map(|e| (1u64 << e.len()) - 1).sum();
    let mut potential = alloc::vec![h_prev];
    let mut rounds = 0;
    let mut code = Code::zeros(n_local, 0);
    while h_prev > 0 {
        if code.length() + shape.s as usize > length_cap || rounds >= max_rounds {
            return Err(Error::Budget(alloc::format!(
                "potential {h_prev} after {rounds} rounds (L = {}, cap {length_cap})",
                code.length()
            )));
        }
        let mut pe = PartialEval::new(field, n_local, shape.d);
        let mut h_step: u64 = 0;
        for _ in 0..shape.k {
            let scores: Vec<u64> = map_indexed(field.order() as usize, |a| {
                let pw = pe.powers(a as u64);
                let state = FoolingState { prior: &prior, eval: &pe };
                local.iter().map(|e| potential_f(&state, e, Some(&pw))).sum()
            });
            let a = argmin(&scores).expect("field is nonempty");
            let h = scores[a];
            assert!(
                q * h as u128 <= q * h_step as u128 + d * (h_prev - h_step) as u128,
                "fooling potential grew faster than the averaging bound"
            );
            h_step = h;
            pe.fix(a as u64);
        }
        assert!(q * h_step as u128 <= shape.k as u128 * d * h_prev as u128, "round bound violated");
        code.append_bits(&pe.prefix, shape.s as usize);
        prior = code.vectors().to_vec();
        h_prev = h_step;
        potential.push(h_prev);
        rounds += 1;
    }

    for e in &local {
        assert!(fools_by_rank(&code, e), "zero potential must fool every set");
    }
    let code = Code::scatter(code, &coords, n);
    let report = CodeReport {
        shape: Some(shape),
        coordinates: n_local,
        max_rounds,
        rounds,
        length: code.length(),
        length_cap,
        potential,
    };
    Ok((code, report))
}
