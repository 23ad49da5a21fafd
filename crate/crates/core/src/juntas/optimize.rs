use alloc::vec::Vec;

use super::oracle::{evaluate_with, uniform_expectation, ContinuousPeo, ExplicitTables, JuntaSystem, Peo};
use super::partial::PartialValue;
use super::partition::{partition_variables_with, PartitionConfig};
use crate::codes::NeighborhoodFamily;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::fourier::{maximize_character_sum_with, wht, CharSumConfig, CharacterSum};
use crate::gf2core::BitVec;
use crate::par::map_indexed;
use crate::util::ceil_log2;

#[derive(Clone, Debug, Default)]
pub struct JuntaConfig {
    /// Cap on `|Y_j ∩ T_k|`; defaults to `ceil(log2 max(4, m n))`.
    pub t_cap: Option<usize>,
    pub partition: PartitionConfig,
    pub charsum: CharSumConfig,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JuntaOutcome {
    /// One value in `M_b` per variable (bits when `b = 1`).
    pub x: Vec<u32>,
    pub value: Dyadic,
    pub expectation: Dyadic,
    pub t_cap: usize,
    /// Number of parts used at each bit level.
    pub parts: Vec<usize>,
}

impl JuntaOutcome {
    pub fn bits(&self) -> BitVec {
        let bools: Vec<bool> = self.x.iter().map(|&v| v != 0).collect();
        BitVec::from_bools(&bools)
    }
}

pub fn default_t_cap(m: usize, n: usize) -> usize {
    (ceil_log2((m * n).max(4) as u64) as usize).max(1)
}

/// Fourier coefficients of each table, merged by variable set. Table `k` is
/// indexed by the bits of `vars[k]` (bit `t` = `vars[k][t]`).
fn tables_to_charsum(n: usize, items: &[(Vec<usize>, Vec<Dyadic>)]) -> Result<CharacterSum> {
    let mut cs = CharacterSum::new(n);
    for (vars, table) in items {
        let spectrum = wht(table)?;
        for (mask, c) in spectrum.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let set: Vec<usize> = (0..vars.len()).filter(|t| mask >> t & 1 == 1).map(|t| vars[t]).collect();
            cs.add_term(&set, c.clone())?;
        }
    }
    Ok(cs)
}

/// Explicit single-bit truth tables: WHT each, merge the coefficients, and
/// maximize the resulting character sum.
pub fn optimize_truthtables(sys: &JuntaSystem, tables: &ExplicitTables) -> Result<BitVec> {
    if sys.b() != 1 || tables.b() != 1 {
        return Err(Error::Parameter("truth-table optimizer works on single bits".into()));
    }
    let items: Vec<(Vec<usize>, Vec<Dyadic>)> =
        sys.supports().iter().cloned().zip(tables.tables().iter().cloned()).collect();
    let cs = tables_to_charsum(sys.n(), &items)?;
    maximize_character_sum_with(&cs, &CharSumConfig::default()).map(|o| o.x)
}

type BitQuery<'a> = dyn Fn(usize, &[Option<bool>]) -> Result<Dyadic> + Sync + 'a;

/// Conditional expectations over bits, one part of a variable partition at a
/// time. Returns the bits and the number of parts.
fn solve_bits(
    n: usize,
    supports: &[Vec<usize>],
    query: &BitQuery<'_>,
    t_cap: usize,
    cfg: &JuntaConfig,
) -> Result<(Vec<bool>, usize)> {
    let family = NeighborhoodFamily::new(n, supports.to_vec())?;
    let mut cap = t_cap;
    let partition = loop {
        match partition_variables_with(&family, cap, &cfg.partition) {
            Ok((p, _)) => break p,
            Err(Error::Infeasible(_)) if cap < family.width() => cap += 1,
            Err(e) => return Err(e),
        }
    };
    let mut x: Vec<Option<bool>> = alloc::vec![None; n];
    let mut part_of = alloc::vec![usize::MAX; n];
    for part in &partition.parts {
        for (local, &v) in part.iter().enumerate() {
            part_of[v] = local;
        }
        let touched: Vec<usize> = (0..supports.len())
            .filter(|&j| supports[j].iter().any(|&v| x[v].is_none() && part.binary_search(&v).is_ok()))
            .collect();
        let items: Vec<Result<(Vec<usize>, Vec<Dyadic>)>> = map_indexed(touched.len(), |k| {
            let j = touched[k];
            let y = &supports[j];
            let positions: Vec<usize> = (0..y.len()).filter(|&t| part.binary_search(&y[t]).is_ok()).collect();
            let mut table = Vec::with_capacity(1 << positions.len());
            let mut q: Vec<Option<bool>> = y.iter().map(|&v| x[v]).collect();
            for pattern in 0usize..(1 << positions.len()) {
                for (b, &t) in positions.iter().enumerate() {
                    q[t] = Some(pattern >> b & 1 == 1);
                }
                table.push(query(j, &q)?);
            }
            Ok((positions.iter().map(|&t| part_of[y[t]]).collect(), table))
        });
        let items: Vec<(Vec<usize>, Vec<Dyadic>)> = items.into_iter().collect::<Result<_>>()?;
        let cs = tables_to_charsum(part.len(), &items)?;
        let out = maximize_character_sum_with(&cs, &cfg.charsum)?;
        // The tables' own values at the chosen point are the new conditional
        // expectations; their sum must not fall below the sum of means.
        let mean: Dyadic = items.iter().map(|(_, t)| t.iter().sum::<Dyadic>().div_pow2(t.len().trailing_zeros())).sum();
        let got: Dyadic = items
            .iter()
            .map(|(vars, t)| {
                let idx = vars.iter().enumerate().fold(0usize, |m, (b, &l)| m | ((out.x.get(l) as usize) << b));
                t[idx].clone()
            })
            .sum();
        assert!(got >= mean, "conditional expectation dropped within a part");
        for (local, &v) in part.iter().enumerate() {
            x[v] = Some(out.x.get(local));
        }
    }
    Ok((x.into_iter().map(|b| b.unwrap_or(false)).collect(), partition.parts.len()))
}

/// Plain PEO over bits (`b = 1`): `S(x) >= E[S]` over uniform `x`.
pub fn optimize_juntas<P: Peo + ?Sized>(sys: &JuntaSystem, peo: &P, cfg: &JuntaConfig) -> Result<JuntaOutcome> {
    if sys.b() != 1 {
        return Err(Error::Parameter("optimize_juntas needs b = 1; use optimize_graded".into()));
    }
    optimize_graded(sys, peo, cfg)
}

/// Graded PEO over `M_b`: bit levels are fixed most significant first, each
/// by the bit optimizer on the level functions.
pub fn optimize_graded<P: Peo + ?Sized>(sys: &JuntaSystem, peo: &P, cfg: &JuntaConfig) -> Result<JuntaOutcome> {
    let n = sys.n();
    let b = sys.b();
    let t_cap = cfg.t_cap.unwrap_or_else(|| default_t_cap(sys.m(), n));
    let expectation = uniform_expectation(peo, sys)?;
    let mut values = alloc::vec![PartialValue::UNKNOWN; n];
    let mut parts = Vec::with_capacity(b as usize);
    for level in 0..b {
        let fixed = &values;
        let query = |j: usize, bits: &[Option<bool>]| -> Result<Dyadic> {
            let q: Vec<PartialValue> = sys.supports()[j]
                .iter()
                .zip(bits)
                .map(|(&v, &bit)| {
                    let mut pv = fixed[v];
                    if let Some(bit) = bit {
                        pv.set(level, b, bit);
                    }
                    pv
                })
                .collect();
            peo.expectation(j, &q)
        };
        let (bits, used) = solve_bits(n, sys.supports(), &query, t_cap, cfg)?;
        for (v, bit) in bits.into_iter().enumerate() {
            values[v].set(level, b, bit);
        }
        parts.push(used);
    }
    let x: Vec<u32> = values.iter().map(|v| v.value(b).expect("all levels fixed")).collect();
    let value = evaluate_with(peo, sys, &x)?;
    if value < expectation {
        return Err(Error::Verification(alloc::format!("S(x) = {value} is below E[S] = {expectation}")));
    }
    Ok(JuntaOutcome { x, value, expectation, t_cap, parts })
}

/// Graded PEO for `f'_j(y) = f_j([y_1 < a_1], ...)` with `y` uniform on
/// `M_b`: each known prefix turns into an exact Bernoulli probability.
pub struct ThresholdPeo<'a, C: ?Sized> {
    pub inner: &'a C,
    pub thresholds: Vec<u64>,
    pub b: u32,
    pub supports: &'a [Vec<usize>],
}

impl<C: ContinuousPeo + ?Sized> Peo for ThresholdPeo<'_, C> {
    fn expectation(&self, j: usize, query: &[PartialValue]) -> Result<Dyadic> {
        let q: Vec<Dyadic> = self.supports[j]
            .iter()
            .zip(query)
            .map(|(&v, pv)| Dyadic::new(pv.count_below(self.thresholds[v], self.b), pv.unknown_count(self.b)))
            .collect();
        self.inner.expectation(j, &q)
    }
}

/// Biased coins `P[x_i = 1] = p_i` with dyadic `p_i`: `S(x) >= E_p[S]`.
pub fn optimize_biased<C: ContinuousPeo + ?Sized>(
    sys: &JuntaSystem,
    peo: &C,
    p: &[Dyadic],
    cfg: &JuntaConfig,
) -> Result<JuntaOutcome> {
    if sys.b() != 1 {
        return Err(Error::Parameter("biased optimizer works on single bits".into()));
    }
    if p.len() != sys.n() {
        return Err(Error::Dimension { expected: sys.n(), found: p.len() });
    }
    if let Some(bad) = p.iter().find(|v| v.is_negative() || **v > Dyadic::one()) {
        return Err(Error::Parameter(alloc::format!("probability {bad} outside [0, 1]")));
    }
    let b = p.iter().map(Dyadic::denom_exp).max().unwrap_or(0).max(1);
    if b > super::partial::MAX_BITS {
        return Err(Error::Parameter(alloc::format!("probabilities need {b} bits")));
    }
    let thresholds: Vec<u64> = p
        .iter()
        .map(|v| {
            let scaled = v.mul_pow2(b).to_integer().expect("denominator divides 2^b");
            u64::try_from(scaled).expect("threshold fits")
        })
        .collect();
    let graded_sys = JuntaSystem::new(sys.n(), b, sys.supports().to_vec())?;
    let graded = ThresholdPeo { inner: peo, thresholds: thresholds.clone(), b, supports: sys.supports() };
    let inner = optimize_graded(&graded_sys, &graded, cfg)?;
    let x: Vec<u32> = inner.x.iter().zip(&thresholds).map(|(&y, &a)| ((y as u64) < a) as u32).collect();

    let mut expectation = Dyadic::zero();
    let mut value = Dyadic::zero();
    for (j, y) in sys.supports().iter().enumerate() {
        let q: Vec<Dyadic> = y.iter().map(|&v| p[v].clone()).collect();
        expectation += &peo.expectation(j, &q)?;
        let point: Vec<Dyadic> = y.iter().map(|&v| Dyadic::from_int(x[v] as i64)).collect();
        value += &peo.expectation(j, &point)?;
    }
    assert_eq!(expectation, inner.expectation, "threshold reduction must preserve E[S]");
    assert_eq!(value, inner.value);
    Ok(JuntaOutcome { x, value, expectation, t_cap: inner.t_cap, parts: inner.parts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn table_of(f: impl Fn(usize) -> i64, bits: usize) -> Vec<Dyadic> {
        (0..1 << bits).map(|i| Dyadic::from_int(f(i))).collect()
    }

    #[test]
    fn single_variable() {
        let sys = JuntaSystem::new(1, 1, vec![vec![0]]).unwrap();
        let t = ExplicitTables::new(&sys, vec![table_of(|i| i as i64, 1)]).unwrap();
        assert!(optimize_truthtables(&sys, &t).unwrap().get(0));
        let out = optimize_juntas(&sys, &t, &JuntaConfig::default()).unwrap();
        assert_eq!(out.x, vec![1]);
    }

    #[test]
    fn complementary_parities() {
        let sys = JuntaSystem::new(2, 1, vec![vec![0, 1], vec![0, 1]]).unwrap();
        let par = |i: usize| (i.count_ones() % 2) as i64;
        let t = ExplicitTables::new(&sys, vec![table_of(par, 2), table_of(|i| 1 - par(i), 2)]).unwrap();
        let out = optimize_juntas(&sys, &t, &JuntaConfig::default()).unwrap();
        assert_eq!(out.value, Dyadic::one());
        assert_eq!(out.expectation, Dyadic::one());
    }

    #[test]
    fn or_of_three() {
        let sys = JuntaSystem::new(3, 1, vec![vec![0, 1, 2]]).unwrap();
        let t = ExplicitTables::new(&sys, vec![table_of(|i| (i != 0) as i64, 3)]).unwrap();
        let out = optimize_juntas(&sys, &t, &JuntaConfig::default()).unwrap();
        assert_eq!(out.expectation, Dyadic::new(7, 3));
        assert_eq!(out.value, Dyadic::one());
    }

    #[test]
    fn graded_point_indicator() {
        let sys = JuntaSystem::new(1, 2, vec![vec![0]]).unwrap();
        let t = ExplicitTables::new(&sys, vec![table_of(|v| (v == 3) as i64, 2)]).unwrap();
        let out = optimize_graded(&sys, &t, &JuntaConfig::default()).unwrap();
        assert_eq!(out.x, vec![3]);
        assert_eq!(out.expectation, Dyadic::new(1, 2));
    }

    #[test]
    fn biased_single_variable() {
        let sys = JuntaSystem::new(1, 1, vec![vec![0]]).unwrap();
        let t = ExplicitTables::new(&sys, vec![table_of(|i| i as i64, 1)]).unwrap();
        let out = optimize_biased(&sys, &t, &[Dyadic::new(3, 2)], &JuntaConfig::default()).unwrap();
        assert_eq!(out.x, vec![1]);
        assert_eq!(out.expectation, Dyadic::new(3, 2));
        assert!(optimize_biased(&sys, &t, &[Dyadic::new(5, 2)], &JuntaConfig::default()).is_err());
    }

    #[test]
    fn forced_partition_still_beats_mean() {
        // Wide functions with a tiny cap exercise the multi-part path.
        let sys = JuntaSystem::new(6, 1, vec![vec![0, 1, 2, 3, 4, 5], vec![5, 3, 1], vec![0, 2]]).unwrap();
        let tables = vec![
            table_of(|i| ((i * 37 + 11) % 7) as i64 - 3, 6),
            table_of(|i| (i % 3) as i64, 3),
            table_of(|i| (i == 2) as i64 * 5, 2),
        ];
        let t = ExplicitTables::new(&sys, tables).unwrap();
        let cfg = JuntaConfig { t_cap: Some(2), ..JuntaConfig::default() };
        let out = optimize_juntas(&sys, &t, &cfg).unwrap();
        assert!(out.parts[0] >= 3);
        assert!(out.value >= out.expectation);
    }
}
