use alloc::vec::Vec;

use super::params::{shape_for, RoundShape};
use super::verify::{verify_code, VerifyMode};
use super::{Code, NeighborhoodFamily};
use crate::error::{Error, Result};
use crate::gf2core::{Field, FieldElem};
use crate::par::{argmax, map_indexed};
use crate::util::{degree_for, log2, pow_sat};

#[derive(Clone, Debug, Default)]
pub struct UnbiasedConfig {
    pub k: Option<u32>,
    pub s: Option<u8>,
    /// Abort threshold on `L`; defaults to `4 (log2 m + width)`.
    pub length_cap: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CodeReport {
    pub shape: Option<RoundShape>,
    /// Coordinates left after preprocessing.
    pub coordinates: usize,
    pub max_rounds: usize,
    pub rounds: usize,
    pub length: usize,
    pub length_cap: usize,
    /// Potential before each round and after the last one: the dead-set count
    /// for unbiased codes, `H_{i,k}` for fooling codes.
    pub potential: Vec<u64>,
}

/// Monomial values `mu_i(alpha)` built up one variable at a time.
///
/// After step `j` index `i` carries the coefficient `prod_{l <= j} alpha_l^{u_l}`
/// of the monomial suffix `i / (d+1)^{j+1}` in the partially evaluated
/// polynomial.
pub(crate) struct PartialEval {
    pub field: Field,
    pub radix: u64,
    pub prefix: Vec<u64>,
    pub step: u32,
}

impl PartialEval {
    pub fn new(field: Field, n: usize, d: u32) -> Self {
        Self { field, radix: d as u64 + 1, prefix: alloc::vec![1; n], step: 0 }
    }

    fn digit(&self, i: usize) -> u64 {
        (i as u64 / pow_sat(self.radix, self.step)) % self.radix
    }

    /// Suffix class of `i` after the current step is taken.
    pub fn suffix_after(&self, i: usize) -> u64 {
        i as u64 / pow_sat(self.radix, self.step + 1)
    }

    pub fn powers(&self, a: u64) -> Vec<u64> {
        let mut pw = Vec::with_capacity(self.radix as usize);
        let mut acc = 1u64;
        for _ in 0..self.radix {
            pw.push(acc);
            acc = self.field.mul(acc, a);
        }
        pw
    }

    /// Coefficient of `i` if the current variable were set to `a`.
    pub fn trial(&self, i: usize, powers: &[u64]) -> u64 {
        self.field.mul(self.prefix[i], powers[self.digit(i) as usize])
    }

    pub fn fix(&mut self, a: u64) {
        let pw = self.powers(a);
        let next: Vec<u64> = (0..self.prefix.len()).map(|i| self.trial(i, &pw)).collect();
        self.prefix = next;
        self.step += 1;
    }
}

/// Whether `sum_{i in e}` of the trial coefficients leaves a nonzero
/// polynomial. `e` is sorted, so its suffix classes appear in runs.
fn alive_after(pe: &PartialEval, e: &[usize], powers: &[u64]) -> bool {
    let mut iter = e.iter().peekable();
    while let Some(&i) = iter.next() {
        let class = pe.suffix_after(i);
        let mut acc = pe.trial(i, powers);
        while let Some(&&j) = iter.peek() {
            if pe.suffix_after(j) != class {
                break;
            }
            acc ^= pe.trial(j, powers);
            iter.next();
        }
        if acc != 0 {
            return true;
        }
    }
    false
}

struct RoundOutcome {
    alphas: Vec<u64>,
    values: Vec<u64>,
    alive: Vec<bool>,
}

fn run_round(sets: &[Vec<usize>], n: usize, k: u32, d: u32, field: Field) -> RoundOutcome {
    let q = field.order();
    let mut pe = PartialEval::new(field, n, d);
    let mut live: Vec<usize> = (0..sets.len()).collect();
    let mut alphas = Vec::with_capacity(k as usize);
    for _ in 0..k {
        let scores = map_indexed(q as usize, |a| {
            let pw = pe.powers(a as u64);
            live.iter().filter(|&&s| alive_after(&pe, &sets[s], &pw)).count()
        });
        let a = argmax(&scores).expect("field is nonempty");
        // Schwartz-Zippel in one variable of degree <= d: the best candidate
        // keeps at least the average number of nonzero polynomials.
        assert!(q as u128 * scores[a] as u128 >= (q - d as u64) as u128 * live.len() as u128);
        let pw = pe.powers(a as u64);
        live.retain(|&s| alive_after(&pe, &sets[s], &pw));
        pe.fix(a as u64);
        alphas.push(a as u64);
    }
    let mut alive = alloc::vec![false; sets.len()];
    for s in live {
        alive[s] = true;
    }
    RoundOutcome { alphas, values: pe.prefix, alive }
}

/// One round over the still-dead sets: picks `alpha_1..alpha_k` greedily and
/// returns them with the sets whose polynomial `mu_e(alpha)` is nonzero.
pub fn unbiased_round(live: &NeighborhoodFamily, k: u32, s: u8) -> Result<(Vec<FieldElem>, NeighborhoodFamily)> {
    if k == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    if s > super::params::MAX_SEARCH_EXP {
        return Err(Error::Budget(alloc::format!("2^{s} candidates per position")));
    }
    let field = Field::new(s)?;
    let n = live.n();
    let d = degree_for(n.max(1) as u64, k);
    if d as u64 >= field.order() {
        return Err(Error::Parameter(alloc::format!("degree cap {d} is not below 2^{s}")));
    }
    let out = run_round(live.sets(), n, k, d, field);
    let survivors = live.sets().iter().zip(&out.alive).filter(|(_, &a)| a).map(|(e, _)| e.clone()).collect();
    let alphas = out.alphas.iter().map(|&a| FieldElem::new(a, s)).collect::<Result<_>>()?;
    Ok((alphas, NeighborhoodFamily::new(n, survivors)?))
}

pub fn build_unbiased_code(family: &NeighborhoodFamily) -> Result<Code> {
    build_unbiased_code_with(family, &UnbiasedConfig::default()).map(|(c, _)| c)
}

pub fn build_unbiased_code_with(family: &NeighborhoodFamily, cfg: &UnbiasedConfig) -> Result<(Code, CodeReport)> {
    let n = family.n();
    let sets = family.distinct_nonempty();
    let m = sets.len();
    let length_cap =
        cfg.length_cap.unwrap_or_else(|| 4 * (libm::ceil(log2(m.max(1) as f64)) as usize + family.width()).max(1));
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

    // With fewer sets than coordinates, one representative per set suffices:
    // A(e) = A(e restricted to the representatives), which still contains v_e.
    let coords: Vec<usize> = if m < n {
        let mut reps: Vec<usize> = sets.iter().map(|e| e[0]).collect();
        reps.sort_unstable();
        reps.dedup();
        reps
    } else {
        (0..n).collect()
    };
    let mut local_of = alloc::vec![usize::MAX; n];
    for (l, &c) in coords.iter().enumerate() {
        local_of[c] = l;
    }
    let mut local: Vec<Vec<usize>> =
        sets.iter().map(|e| e.iter().filter(|&&i| local_of[i] != usize::MAX).map(|&i| local_of[i]).collect()).collect();
    local.sort();
    local.dedup();
    let n_local = coords.len();

    let shape = shape_for(local.len() as f64, n_local, cfg.k, cfg.s)?;
    let field = Field::new(shape.s)?;
    let max_rounds = if shape.epsilon > 0.0 && shape.epsilon < 1.0 {
        libm::ceil(1.0 + log2(local.len() as f64) / -log2(shape.epsilon)) as usize
    } else {
        usize::MAX
    };

    let mut code = Code::zeros(n_local, 0);
    let mut dead: Vec<Vec<usize>> = local;
    let mut potential = alloc::vec![dead.len() as u64];
    let mut rounds = 0;
    while !dead.is_empty() {
        if code.length() + shape.s as usize > length_cap || rounds >= max_rounds {
            return Err(Error::Budget(alloc::format!(
                "{} sets still unbiased-dead after {rounds} rounds (L = {}, cap {length_cap})",
                dead.len(),
                code.length()
            )));
        }
        let out = run_round(&dead, n_local, shape.k, shape.d, field);
        code.append_bits(&out.values, shape.s as usize);
        let next: Vec<Vec<usize>> = dead.iter().zip(&out.alive).filter(|(_, &a)| !a).map(|(e, _)| e.clone()).collect();
        assert!(
            (field.order() as u128) * next.len() as u128 <= (shape.k as u128 * shape.d as u128) * dead.len() as u128,
            "dead sets shrank too little"
        );
        dead = next;
        potential.push(dead.len() as u64);
        rounds += 1;
    }

    let code = Code::scatter(code, &coords, n);
    verify_code(&code, family, VerifyMode::Unbiased).map_err(Error::from)?;
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
