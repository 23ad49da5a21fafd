use alloc::vec::Vec;

use super::partial::{low_mask, PartialValue, MAX_BITS};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// `S = sum_j f_j`, where `f_j` reads the variables `supports[j]` (in that
/// order) and each variable takes values in `M_b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JuntaSystem {
    n: usize,
    b: u32,
    supports: Vec<Vec<usize>>,
}

impl JuntaSystem {
    pub fn new(n: usize, b: u32, supports: Vec<Vec<usize>>) -> Result<Self> {
        if b == 0 || b > MAX_BITS {
            return Err(Error::Parameter(alloc::format!("bit depth {b} outside 1..={MAX_BITS}")));
        }
        for y in &supports {
            if let Some(&bad) = y.iter().find(|&&i| i >= n) {
                return Err(Error::OutOfRange { index: bad, bound: n });
            }
            let mut sorted = y.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Parameter(alloc::format!("support {y:?} repeats a variable")));
            }
        }
        Ok(Self { n, b, supports })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn m(&self) -> usize {
        self.supports.len()
    }

    pub fn supports(&self) -> &[Vec<usize>] {
        &self.supports
    }

    pub fn width(&self) -> usize {
        self.supports.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Partial-expectations oracle: `E[f_j]` when support variable `t` follows
/// `query[t]` and unknown bits are independent fair coins.
///
/// Graded optimizers only issue graded queries; implementations that accept
/// arbitrary patterns serve as plain PEOs too.
pub trait Peo: Sync {
    fn expectation(&self, j: usize, query: &[PartialValue]) -> Result<Dyadic>;
}

/// Continuous PEO over bits: `E[f_j]` when support bit `t` is 1 with
/// probability `q[t]`, independently.
pub trait ContinuousPeo: Sync {
    fn expectation(&self, j: usize, q: &[Dyadic]) -> Result<Dyadic>;
}

impl<P: Peo + ?Sized> Peo for &P {
    fn expectation(&self, j: usize, query: &[PartialValue]) -> Result<Dyadic> {
        (**self).expectation(j, query)
    }
}

impl<P: ContinuousPeo + ?Sized> ContinuousPeo for &P {
    fn expectation(&self, j: usize, q: &[Dyadic]) -> Result<Dyadic> {
        (**self).expectation(j, q)
    }
}

/// Restricts a continuous PEO to probabilities in `{0, 1/2, 1}`, giving a
/// plain PEO over bits (`b = 1`).
pub struct PlainFromContinuous<C>(pub C);

impl<C: ContinuousPeo> Peo for PlainFromContinuous<C> {
    fn expectation(&self, j: usize, query: &[PartialValue]) -> Result<Dyadic> {
        let q: Vec<Dyadic> = query
            .iter()
            .map(|v| match v.get(0, 1) {
                None => Dyadic::half(),
                Some(true) => Dyadic::one(),
                Some(false) => Dyadic::zero(),
            })
            .collect();
        self.0.expectation(j, &q)
    }
}

/// Explicit truth tables. Entry `sum_t value_t 2^{b t}` of table `j` is
/// `f_j` at support values `value_0, value_1, ...`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitTables {
    b: u32,
    tables: Vec<Vec<Dyadic>>,
}

impl ExplicitTables {
    pub fn new(sys: &JuntaSystem, tables: Vec<Vec<Dyadic>>) -> Result<Self> {
        if tables.len() != sys.m() {
            return Err(Error::Dimension { expected: sys.m(), found: tables.len() });
        }
        for (y, t) in sys.supports().iter().zip(&tables) {
            let bits = sys.b() as usize * y.len();
            if bits > 24 {
                return Err(Error::Budget(alloc::format!("truth table over {bits} bits")));
            }
            if t.len() != 1 << bits {
                return Err(Error::Dimension { expected: 1 << bits, found: t.len() });
            }
        }
        Ok(Self { b: sys.b(), tables })
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn tables(&self) -> &[Vec<Dyadic>] {
        &self.tables
    }

    pub fn eval(&self, j: usize, values: &[u32]) -> Dyadic {
        let idx = values.iter().enumerate().fold(0usize, |acc, (t, &v)| acc | ((v as usize) << (self.b as usize * t)));
        self.tables[j][idx].clone()
    }

    fn check_arity(&self, j: usize, len: usize) -> Result<()> {
        let table = self.tables.get(j).ok_or(Error::OutOfRange { index: j, bound: self.tables.len() })?;
        if table.len() != 1 << (self.b as usize * len) {
            return Err(Error::Dimension {
                expected: table.len().trailing_zeros() as usize / self.b as usize,
                found: len,
            });
        }
        Ok(())
    }
}

impl Peo for ExplicitTables {
    fn expectation(&self, j: usize, query: &[PartialValue]) -> Result<Dyadic> {
        self.check_arity(j, query.len())?;
        let b = self.b;
        let table = &self.tables[j];
        let mut free = 0u32;
        let mut fixed = 0usize;
        let mut free_pos: Vec<usize> = Vec::new();
        for (t, v) in query.iter().enumerate() {
            if v.known_mask() & !low_mask(b) != 0 {
                return Err(Error::Parameter("query value wider than b bits".into()));
            }
            fixed |= (v.bits() as usize) << (b as usize * t);
            let unknown = low_mask(b) & !v.known_mask();
            free += unknown.count_ones();
            let mut u = unknown;
            while u != 0 {
                free_pos.push(b as usize * t + u.trailing_zeros() as usize);
                u &= u - 1;
            }
        }
        let mut sum = Dyadic::zero();
        for c in 0usize..(1 << free) {
            let idx = free_pos.iter().enumerate().fold(fixed, |acc, (k, &p)| acc | (((c >> k) & 1) << p));
            sum += &table[idx];
        }
        Ok(sum.div_pow2(free))
    }
}

impl ContinuousPeo for ExplicitTables {
    fn expectation(&self, j: usize, q: &[Dyadic]) -> Result<Dyadic> {
        if self.b != 1 {
            return Err(Error::Parameter("continuous queries need single-bit variables".into()));
        }
        self.check_arity(j, q.len())?;
        let one = Dyadic::one();
        let mut sum = Dyadic::zero();
        for (idx, value) in self.tables[j].iter().enumerate() {
            if value.is_zero() {
                continue;
            }
            let mut w = one.clone();
            for (t, qt) in q.iter().enumerate() {
                if idx >> t & 1 == 1 {
                    w = &w * qt;
                } else {
                    w = &w * &(&one - qt);
                }
                if w.is_zero() {
                    break;
                }
            }
            sum += &(&w * value);
        }
        Ok(sum)
    }
}

/// `f_j` at a fully known point, through the oracle.
pub fn evaluate_with<P: Peo + ?Sized>(peo: &P, sys: &JuntaSystem, x: &[u32]) -> Result<Dyadic> {
    if x.len() != sys.n() {
        return Err(Error::Dimension { expected: sys.n(), found: x.len() });
    }
    let b = sys.b();
    let mut total = Dyadic::zero();
    for (j, y) in sys.supports().iter().enumerate() {
        let query: Vec<PartialValue> = y.iter().map(|&i| PartialValue::full(x[i], b)).collect();
        total += &peo.expectation(j, &query)?;
    }
    Ok(total)
}

/// `E[S]` under the uniform distribution, through the oracle.
pub fn uniform_expectation<P: Peo + ?Sized>(peo: &P, sys: &JuntaSystem) -> Result<Dyadic> {
    let mut total = Dyadic::zero();
    for (j, y) in sys.supports().iter().enumerate() {
        total += &peo.expectation(j, &alloc::vec![PartialValue::UNKNOWN; y.len()])?;
    }
    Ok(total)
}
