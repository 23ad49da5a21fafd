use alloc::vec::Vec;

use num_bigint::BigInt;

use super::graph::Hypergraph;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::juntas::{graded_level, optimize_graded, JuntaConfig, JuntaSystem, PartialValue, Peo, MAX_BITS};
use crate::util::ceil_log2;

/// `F(x) = floor(d x / 2^b)`.
pub fn color_of(x: u32, d: usize, b: u32) -> u32 {
    ((x as u64 * d as u64) >> b) as u32
}

/// 2x2 transfer matrix over the flag "the top color of the current class is
/// already used".
type Mat = [[Dyadic; 2]; 2];

fn identity() -> Mat {
    [[Dyadic::one(), Dyadic::zero()], [Dyadic::zero(), Dyadic::one()]]
}

fn reset() -> Mat {
    [[Dyadic::one(), Dyadic::zero()], [Dyadic::one(), Dyadic::zero()]]
}

fn mul(a: &Mat, b: &Mat) -> Mat {
    let e = |i: usize, j: usize| &(&a[i][0] * &b[0][j]) + &(&a[i][1] * &b[1][j]);
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

fn add_scaled(acc: &mut Mat, m: &Mat, w: &Dyadic) {
    for i in 0..2 {
        for j in 0..2 {
            acc[i][j] += &(&m[i][j] * w);
        }
    }
}

/// Product of a run of matrices, split in halves.
fn product(ms: &[Mat]) -> Mat {
    match ms.len() {
        0 => identity(),
        1 => ms[0].clone(),
        n => mul(&product(&ms[..n / 2]), &product(&ms[n / 2..])),
    }
}

/// Classes of `M_L` inside `M_b` and the colors they can reach.
struct Layout {
    d: usize,
    b: u32,
    level: u32,
}

impl Layout {
    fn width(&self) -> u64 {
        1u64 << (self.b - self.level)
    }

    fn lo(&self, c: u64) -> u32 {
        color_of((c * self.width()) as u32, self.d, self.b)
    }

    fn hi(&self, c: u64) -> u32 {
        color_of(((c + 1) * self.width() - 1) as u32, self.d, self.b)
    }

    /// First `x` with `F(x) >= k`.
    fn start(&self, k: u32) -> u64 {
        ((k as u64) << self.b).div_ceil(self.d as u64)
    }

    /// `P[F(x) = k]` for `x` uniform in class `c`.
    fn share(&self, c: u64, k: u32) -> Dyadic {
        let (from, to) = (c * self.width(), (c + 1) * self.width());
        let lo = self.start(k).max(from);
        let hi = self.start(k + 1).min(to);
        Dyadic::new(hi.saturating_sub(lo), self.b - self.level)
    }

    /// Transfer matrix of class `c` holding `s` vertices.
    fn class(&self, c: u64, s: usize) -> Mat {
        let carries = c > 0 && self.hi(c - 1) == self.hi(c);
        if s == 0 {
            return if carries { identity() } else { reset() };
        }
        let (lo, hi) = (self.lo(c), self.hi(c));
        let below: Vec<Dyadic> = (lo..hi).map(|k| self.share(c, k)).collect();
        let top = self.share(c, hi);
        let blocked = c > 0 && self.hi(c - 1) == lo;
        let row = |avoid_lo: bool| -> [Dyadic; 2] {
            // Colors other than `hi` that the class may use.
            let pool: Vec<&Dyadic> = below.iter().skip(avoid_lo as usize).collect();
            let e = elementary(&pool, s);
            let unused = e[s].mul_int(factorial(s));
            let top_ok = !(avoid_lo && lo == hi);
            let used = if top_ok { (&top * &e[s - 1]).mul_int(factorial(s)) } else { Dyadic::zero() };
            [unused, used]
        };
        let free = row(false);
        let second = if blocked { row(true) } else { free.clone() };
        [free, second]
    }
}

fn factorial(s: usize) -> i64 {
    (1..=s as i64).product()
}

/// `e_0 .. e_s` of the given values.
fn elementary(values: &[&Dyadic], s: usize) -> Vec<Dyadic> {
    let mut e = alloc::vec![Dyadic::zero(); s + 1];
    e[0] = Dyadic::one();
    for &v in values {
        for t in (1..=s).rev() {
            let add = &e[t - 1] * v;
            e[t] += &add;
        }
    }
    e
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut acc = BigInt::from(1);
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Probability that the values in `query` get pairwise distinct colors
/// under `F`, with unknown bits fair coins. The query must be graded.
pub fn rainbow_peo(query: &[PartialValue], d: usize, b: u32) -> Result<Dyadic> {
    if d < 2 || b == 0 || b > MAX_BITS || ceil_log2(d as u64) > b {
        return Err(Error::Parameter(alloc::format!("d = {d} colors do not fit in {b} bits")));
    }
    let l = graded_level(query, b).ok_or(Error::NotGraded)?;
    let layout = Layout { d, b, level: l + 1 };
    assert_structure(&layout);

    // Vertices grouped by their top-l prefix: (prefix, known 0, known 1, undecided).
    let mut groups: Vec<(u64, usize, usize, usize)> = Vec::new();
    let mut keys: Vec<(u64, Option<bool>)> =
        query.iter().map(|v| ((v.bits() >> (b - l)) as u64, v.get(l, b))).collect();
    keys.sort_unstable();
    for (p, bit) in keys {
        if groups.last().is_none_or(|g| g.0 != p) {
            groups.push((p, 0, 0, 0));
        }
        let g = groups.last_mut().unwrap();
        match bit {
            Some(false) => g.1 += 1,
            Some(true) => g.2 += 1,
            None => g.3 += 1,
        }
    }

    let mut chain = Vec::with_capacity(2 * groups.len());
    let mut last: Option<u64> = None;
    for &(p, a0, a1, u) in &groups {
        let (left, right) = (2 * p, 2 * p + 1);
        if let Some(prev) = last {
            if prev + 1 < left {
                chain.push(if layout.hi(left - 1) == layout.hi(prev) { identity() } else { reset() });
            }
        }
        let mut m = [[Dyadic::zero(), Dyadic::zero()], [Dyadic::zero(), Dyadic::zero()]];
        for j in 0..=u {
            let w = Dyadic::new(binomial(u, j), u as u32);
            add_scaled(&mut m, &mul(&layout.class(left, a0 + j), &layout.class(right, a1 + u - j)), &w);
        }
        chain.push(m);
        last = Some(right);
    }
    let total = product(&chain);
    Ok(&total[0][0] + &total[0][1])
}

/// Each color's class set is one class or two adjacent ones, and each class
/// shares at most one color with the next; the first fact needs classes at
/// least as wide as a color band.
fn assert_structure(layout: &Layout) {
    let classes = 1u64 << layout.level;
    if (layout.width() + 1) * (layout.d as u64) < 1u64 << layout.b {
        return;
    }
    for k in 0..layout.d as u32 {
        let g: Vec<u64> = (0..classes).filter(|&c| layout.lo(c) <= k && k <= layout.hi(c)).collect();
        assert!(g.len() <= 2 && g.windows(2).all(|w| w[1] == w[0] + 1), "color {k} spans classes {g:?}");
    }
    for c in 0..classes.saturating_sub(1) {
        let shared = (0..layout.d as u32)
            .filter(|&k| layout.lo(c) <= k && k <= layout.hi(c) && layout.lo(c + 1) <= k && k <= layout.hi(c + 1))
            .count();
        assert!(shared <= 1, "classes {c} and {} share {shared} colors", c + 1);
    }
}

/// Rainbow indicators of a hypergraph's edges as juntas over `M_b` values.
pub struct RainbowPeo {
    d: usize,
    b: u32,
}

impl RainbowPeo {
    pub fn new(d: usize, b: u32) -> Self {
        Self { d, b }
    }
}

impl Peo for RainbowPeo {
    fn expectation(&self, _j: usize, query: &[PartialValue]) -> Result<Dyadic> {
        rainbow_peo(query, self.d, self.b)
    }
}

#[derive(Clone, Debug, Default)]
pub struct RainbowConfig {
    /// Bit depth; the default starts at `ceil(log d) + ceil(log 4 m d^2)`
    /// and grows until the expectation clears the bound.
    pub b: Option<u32>,
    pub junta: JuntaConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RainbowMethod {
    /// The bound asks for at most one rainbow edge.
    SingleEdge,
    Optimized,
}

#[derive(Clone, Debug)]
pub struct RainbowOutcome {
    /// Colors in `0..d`.
    pub colors: Vec<u32>,
    pub rainbow: usize,
    /// `ceil(m d! / d^d)`.
    pub bound: usize,
    pub method: RainbowMethod,
    pub b: u32,
    /// Expected rainbow count of the uniform coloring at depth `b`.
    pub expectation: Dyadic,
}

/// `ceil(m d! / d^d)`.
pub fn rainbow_bound(m: usize, d: usize) -> Result<usize> {
    let num = BigInt::from(m) * (1..=d).map(BigInt::from).product::<BigInt>();
    let den = num_traits::pow(BigInt::from(d), d);
    let q = num_integer::Integer::div_ceil(&num, &den);
    usize::try_from(q).map_err(|_| Error::Parameter("bound overflows".into()))
}

/// A `d`-coloring with at least `ceil(m d! / d^d)` rainbow edges.
pub fn rainbow_color(h: &Hypergraph, cfg: &RainbowConfig) -> Result<RainbowOutcome> {
    let (n, d, m) = (h.n(), h.d(), h.m());
    if d < 2 {
        return Err(Error::Parameter("rainbow coloring needs d >= 2".into()));
    }
    let bound = rainbow_bound(m, d)?;
    let floor_bits = ceil_log2(d as u64);
    if let Some(b) = cfg.b {
        if b < floor_bits.max(1) || b > MAX_BITS {
            return Err(Error::Parameter(alloc::format!("d = {d} colors do not fit in {b} bits")));
        }
    }
    let mut colors = alloc::vec![0u32; n];
    if bound <= 1 {
        if let Some(e) = h.edges().first() {
            for (k, &v) in e.iter().enumerate() {
                colors[v] = k as u32;
            }
        }
        let rainbow = h.rainbow_count(&colors);
        assert!(rainbow >= bound);
        return Ok(RainbowOutcome {
            colors,
            rainbow,
            bound,
            method: RainbowMethod::SingleEdge,
            b: cfg.b.unwrap_or(floor_bits.max(1)),
            expectation: Dyadic::zero(),
        });
    }

    // Only vertices on some edge become variables.
    let mut index = alloc::vec![usize::MAX; n];
    let mut used = Vec::new();
    for e in h.edges() {
        for &v in e {
            if index[v] == usize::MAX {
                index[v] = used.len();
                used.push(v);
            }
        }
    }
    let supports: Vec<Vec<usize>> = h.edges().iter().map(|e| e.iter().map(|&v| index[v]).collect()).collect();

    let d_pow_d = num_traits::pow(BigInt::from(d), d);
    let target = BigInt::from(m) * (1..=d).map(BigInt::from).product::<BigInt>() - 1;
    let mut b = cfg.b.unwrap_or_else(|| floor_bits + ceil_log2(4 * (m * d * d) as u64)).max(1);
    let expectation = loop {
        let p = rainbow_peo(&alloc::vec![PartialValue::UNKNOWN; d], d, b)?;
        let e = p.mul_int(m as i64);
        // E d^d > m d! - 1
        if (e.numer() * &d_pow_d) > (&target << e.denom_exp() as usize) {
            break e;
        }
        if cfg.b.is_some() || b == MAX_BITS {
            return Err(Error::Parameter(alloc::format!("expectation {e} at b = {b} does not clear the bound")));
        }
        b += 1;
    };

    let sys = JuntaSystem::new(used.len(), b, supports)?;
    let out = optimize_graded(&sys, &RainbowPeo::new(d, b), &cfg.junta)?;
    for (t, &v) in used.iter().enumerate() {
        colors[v] = color_of(out.x[t], d, b);
    }
    let rainbow = h.rainbow_count(&colors);
    if rainbow < bound {
        return Err(Error::Verification(alloc::format!("{rainbow} rainbow edges, bound {bound}")));
    }
    Ok(RainbowOutcome { colors, rainbow, bound, method: RainbowMethod::Optimized, b, expectation })
}
