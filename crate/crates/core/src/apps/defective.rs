use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::graph::Graph;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::juntas::{JuntaConfig, PartialValue};
use crate::lll::{deterministic_mt, union_bound_assignment, BadEvent, Event, LllInstance, MtConfig};

/// Over `[v, w_1, .., w_r]`: more than `cap` of the `w_t` share `v`'s value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SameColorEvent {
    pub cap: usize,
}

impl BadEvent for SameColorEvent {
    fn validate(&self, arity: usize, b: u32) -> Result<()> {
        if arity == 0 {
            return Err(Error::Parameter("same-color event needs its center".into()));
        }
        if b > 16 {
            return Err(Error::Parameter(alloc::format!("same-color event enumerates 2^{b} center values")));
        }
        Ok(())
    }

    fn holds(&self, values: &[u32], _b: u32) -> bool {
        values[1..].iter().filter(|&&w| w == values[0]).count() > self.cap
    }

    fn probability(&self, query: &[PartialValue], b: u32) -> Result<Dyadic> {
        let center = query[0];
        let mut total = Dyadic::zero();
        for c in center.completions(b) {
            let ps = query[1..].iter().map(|q| {
                let hit = (c & q.known_mask() == q.bits()) as u64;
                Dyadic::new(hit, q.unknown_count(b))
            });
            total += &tail_above(ps, self.cap);
        }
        Ok(total.div_pow2(center.unknown_count(b)))
    }
}

/// `P[sum of independent indicators > cap]`.
fn tail_above(ps: impl Iterator<Item = Dyadic>, cap: usize) -> Dyadic {
    // Mass at counts 0..=cap, and the mass already past the cap.
    let mut dist = alloc::vec![Dyadic::one()];
    let mut over = Dyadic::zero();
    for p in ps {
        let miss = &Dyadic::one() - &p;
        let mut next = alloc::vec![Dyadic::zero(); (dist.len() + 1).min(cap + 1)];
        for (c, w) in dist.iter().enumerate() {
            next[c] += &(w * &miss);
            let up = w * &p;
            match next.get_mut(c + 1) {
                Some(slot) => *slot += &up,
                None => over += &up,
            }
        }
        dist = next;
    }
    over
}

/// `P[Bin(n, 2^-j) > cap]`.
pub fn binomial_tail(n: usize, j: u32, cap: usize) -> Dyadic {
    tail_above(core::iter::repeat_n(Dyadic::new(1, j), n), cap)
}

#[derive(Clone, Debug)]
pub struct SplitConfig {
    pub k: f64,
    /// Double `K` until the LLL condition holds.
    pub escalate: bool,
    pub mt: MtConfig,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self { k: 4.0, escalate: true, mt: MtConfig { epsilon: 0.5, ..MtConfig::default() } }
    }
}

#[derive(Clone, Debug)]
pub struct SplitOutcome {
    /// Sub-colors in `0..2^j`.
    pub colors: Vec<u32>,
    pub j: u32,
    /// `K` after escalation.
    pub k: f64,
    pub cap: usize,
    pub events: usize,
    pub resamplings: usize,
}

/// `floor((D / 2^j)(1 + K sqrt((2^j / D) ln D)))`.
pub fn split_cap(delta: f64, j: u32, k: f64) -> usize {
    let t = libm::ldexp(1.0, j as i32);
    if delta <= 1.0 {
        return delta.max(0.0) as usize;
    }
    libm::floor(delta / t * (1.0 + k * libm::sqrt(t / delta * libm::log(delta)))) as usize
}

/// Largest `j` with `2^j <= D / (K ln D)`, if any.
pub fn max_split_bits(delta: f64, k: f64) -> Option<u32> {
    if delta <= 1.0 {
        return None;
    }
    let room = delta / (k * libm::log(delta));
    (room >= 1.0).then(|| libm::floor(libm::log2(room)) as u32)
}

/// Splits every class of `classes` into `2^j` sub-classes so that each
/// vertex keeps at most `split_cap(delta, j, K)` same-class neighbours of
/// its own sub-class, where `delta` bounds the same-class degrees.
pub fn split_classes(g: &Graph, classes: &[u32], delta: f64, j: u32, cfg: &SplitConfig) -> Result<SplitOutcome> {
    let n = g.n();
    if classes.len() != n {
        return Err(Error::Dimension { expected: n, found: classes.len() });
    }
    let measured = (0..n).map(|v| g.same_color_degree(v, classes)).max().unwrap_or(0);
    if measured as f64 > delta {
        return Err(Error::Parameter(alloc::format!("same-class degree {measured} exceeds {delta}")));
    }
    if j == 0 {
        return Ok(SplitOutcome { colors: alloc::vec![0; n], j, k: cfg.k, cap: measured, events: 0, resamplings: 0 });
    }
    if max_split_bits(delta, cfg.k).is_none_or(|most| j > most) {
        return Err(Error::Parameter(alloc::format!("2^{j} exceeds D / (K ln D) for D = {delta}, K = {}", cfg.k)));
    }
    let mut k = cfg.k;
    loop {
        let cap = split_cap(delta, j, k);
        let events: Vec<Event> = (0..n)
            .filter_map(|v| {
                let mut vars = alloc::vec![v];
                vars.extend(g.neighbors(v).iter().copied().filter(|&w| classes[w] == classes[v]));
                (vars.len() - 1 > cap).then(|| Event::new(vars, Arc::new(SameColorEvent { cap }), None))
            })
            .collect();
        let count = events.len();
        let inst = LllInstance::new(n, j, events)?;
        match deterministic_mt(&inst, &cfg.mt) {
            Ok(out) => {
                let colors = out.assignment;
                let worst = (0..n)
                    .map(|v| {
                        g.neighbors(v).iter().filter(|&&w| classes[w] == classes[v] && colors[w] == colors[v]).count()
                    })
                    .max()
                    .unwrap_or(0);
                if worst > cap {
                    return Err(Error::Verification(alloc::format!("{worst} same-color neighbours, cap {cap}")));
                }
                return Ok(SplitOutcome { colors, j, k, cap, events: count, resamplings: out.run.log.len() });
            }
            Err(Error::LllCondition { .. }) if cfg.escalate && cap < measured => k *= 2.0,
            Err(e) => return Err(e),
        }
    }
}

/// `split_classes` with every vertex in one class.
pub fn split_degrees(g: &Graph, j: u32, cfg: &SplitConfig) -> Result<SplitOutcome> {
    split_classes(g, &alloc::vec![0; g.n()], g.max_degree() as f64, j, cfg)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleStage {
    pub delta: f64,
    pub b: f64,
    /// Bits used at this stage after clamping.
    pub j: u32,
    /// Bits the recursion asks for.
    pub j_target: u32,
    /// Colors before the stage.
    pub t: u64,
}

/// Degree-splitting plan: stage `i` splits classes of degree `delta_i` into
/// `2^{j_i}` parts.
#[derive(Clone, Debug, PartialEq)]
pub struct ColorSchedule {
    pub k_const: f64,
    pub defect: usize,
    pub stages: Vec<ScheduleStage>,
    pub r: usize,
    /// `delta_{r+1}` and `t_{r+1}`.
    pub final_delta: f64,
    pub final_t: u64,
    /// No stage needed clamping.
    pub asymptotic: bool,
}

impl ColorSchedule {
    pub fn new(delta: usize, defect: usize, k_const: f64) -> Result<Self> {
        if defect == 0 || defect > delta {
            return Err(Error::Parameter(alloc::format!("defect {defect} outside 1..={delta}")));
        }
        let ln = libm::log;
        let mut bs = alloc::vec![delta as f64];
        while *bs.last().unwrap() >= defect as f64 {
            let b = *bs.last().unwrap();
            bs.push(0.5 * ln(b) * ln(b));
        }
        let r = bs.len() - 2;
        let mut stages = Vec::with_capacity(r + 1);
        let (mut d, mut t) = (delta as f64, 1u64);
        let mut asymptotic = true;
        for (i, &b) in bs.iter().enumerate().take(r + 1) {
            let ratio = if i < r { d / (ln(d) * ln(d)) } else { d / defect as f64 };
            let j_target = if ratio > 1.0 { libm::ceil(libm::log2(ratio)) as u32 } else { 0 };
            let j = max_split_bits(d, k_const).map_or(0, |most| most.min(j_target));
            asymptotic &= j == j_target;
            stages.push(ScheduleStage { delta: d, b, j, j_target, t });
            if d > 1.0 {
                d = d / libm::ldexp(1.0, j as i32) * (1.0 + k_const * libm::sqrt(2.0 / ln(d)));
            }
            t <<= j;
        }
        Ok(Self { k_const, defect, stages, r, final_delta: d, final_t: t, asymptotic })
    }

    /// `k <= b_i <= delta_i <= 4 b_i` and `2^{j_i} <= delta_i / (K ln delta_i)`
    /// for each stage.
    pub fn invariants(&self) -> Vec<bool> {
        self.stages
            .iter()
            .map(|s| {
                let k = self.defect as f64;
                let ordered = k <= s.b && s.b <= s.delta && s.delta <= 4.0 * s.b;
                let room =
                    s.delta > 1.0 && libm::ldexp(1.0, s.j as i32) <= s.delta / (self.k_const * libm::log(s.delta));
                ordered && room
            })
            .collect()
    }
}

/// Load cap for the large-degree split. Every cap keeps `S(x) >= E[S]`;
/// small ones keep the per-part enumeration cheap.
pub const LARGE_SPLIT_T_CAP: usize = 4;

#[derive(Clone, Debug)]
pub struct DefectiveConfig {
    pub split: SplitConfig,
    pub junta: JuntaConfig,
}

impl Default for DefectiveConfig {
    fn default() -> Self {
        Self {
            split: SplitConfig::default(),
            junta: JuntaConfig { t_cap: Some(LARGE_SPLIT_T_CAP), ..JuntaConfig::default() },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageReport {
    pub j: u32,
    pub k: f64,
    pub cap: usize,
    /// Largest same-class degree after the stage.
    pub measured: usize,
}

#[derive(Clone, Debug)]
pub struct DefectiveOutcome {
    pub colors: Vec<u32>,
    pub num_colors: usize,
    pub max_defect: usize,
    /// Every vertex has at most `c_defect * k` same-colored neighbours.
    pub c_defect: f64,
    /// `num_colors = c_colors * Delta / k`.
    pub c_colors: f64,
    /// `(j, cap)` of the initial split for large degrees.
    pub large_split: Option<(u32, usize)>,
    pub schedule: Option<ColorSchedule>,
    pub stages: Vec<StageReport>,
    /// Colors per class in the final local search.
    pub finish_colors: usize,
    pub notes: Vec<String>,
}

/// A coloring where every vertex has at most `k` neighbours of its color.
pub fn defective_color(g: &Graph, k: usize, cfg: &DefectiveConfig) -> Result<DefectiveOutcome> {
    if k == 0 {
        return Err(Error::Parameter("defect must be at least 1".into()));
    }
    let n = g.n();
    let delta = g.max_degree();
    let mut notes = Vec::new();
    let mut classes = alloc::vec![0u32; n];
    let mut large_split = None;
    let mut schedule = None;
    let mut stages = Vec::new();

    if delta > k {
        let ln_n = libm::log(n.max(2) as f64);
        let j0 = if delta as f64 >= ln_n { libm::floor(libm::log2(delta as f64 / ln_n)).max(0.0) as u32 } else { 0 };
        if j0 >= 1 {
            let mut cap = delta * 2 / (1 << j0);
            while cap > 0 && binomial_tail(delta, j0, cap - 1).mul_int(n as i64) < Dyadic::one() {
                cap -= 1;
            }
            while binomial_tail(delta, j0, cap).mul_int(n as i64) >= Dyadic::one() {
                cap += 1;
            }
            let events = (0..n)
                .filter(|&v| g.degree(v) > cap)
                .map(|v| {
                    let mut vars = alloc::vec![v];
                    vars.extend_from_slice(g.neighbors(v));
                    Event::new(vars, Arc::new(SameColorEvent { cap }), None)
                })
                .collect();
            let inst = LllInstance::new(n, j0, events)?;
            classes = union_bound_assignment(&inst, &cfg.junta)?;
            large_split = Some((j0, cap));
            notes.push(alloc::format!("large-degree split into 2^{j0} classes with cap {cap}"));
        }

        let current = max_class_degree(g, &classes);
        if current > k {
            let plan = ColorSchedule::new(current, k, cfg.split.k)?;
            if !plan.asymptotic {
                notes.push(alloc::format!("schedule clamped outside its asymptotic regime (K = {})", cfg.split.k));
            }
            for stage in &plan.stages {
                if stage.j == 0 {
                    continue;
                }
                let delta_i = max_class_degree(g, &classes) as f64;
                let j = max_split_bits(delta_i, cfg.split.k).map_or(0, |most| most.min(stage.j));
                if j == 0 {
                    continue;
                }
                let out = split_classes(g, &classes, delta_i, j, &cfg.split)?;
                for (c, s) in classes.iter_mut().zip(&out.colors) {
                    *c = (*c << j) | s;
                }
                stages.push(StageReport { j, k: out.k, cap: out.cap, measured: max_class_degree(g, &classes) });
            }
            schedule = Some(plan);
        }
    }

    let current = max_class_degree(g, &classes);
    let per_class = (current + 1).div_ceil(k + 1).max(1);
    let sub = local_search(g, &classes, per_class);
    let mut colors: Vec<u32> = classes.iter().zip(&sub).map(|(&c, &s)| c * per_class as u32 + s).collect();
    let num_colors = compact(&mut colors);
    let max_defect = g.max_defect(&colors);
    if max_defect > k {
        return Err(Error::Verification(alloc::format!("defect {max_defect} exceeds {k}")));
    }
    Ok(DefectiveOutcome {
        colors,
        num_colors,
        max_defect,
        c_defect: 1.0,
        c_colors: num_colors as f64 * k as f64 / delta.max(1) as f64,
        large_split,
        schedule,
        stages,
        finish_colors: per_class,
        notes,
    })
}

fn max_class_degree(g: &Graph, classes: &[u32]) -> usize {
    (0..g.n()).map(|v| g.same_color_degree(v, classes)).max().unwrap_or(0)
}

/// Splits each class into `c` parts. A vertex with more than
/// `floor(deg / c)` neighbours in its part moves to its emptiest part; each
/// move removes a monochromatic edge, so this stops with every vertex at or
/// under `floor(deg / c)`.
fn local_search(g: &Graph, classes: &[u32], c: usize) -> Vec<u32> {
    let n = g.n();
    let mut sub = alloc::vec![0u32; n];
    let mut counts = alloc::vec![0usize; c];
    let mut moved = true;
    while moved {
        moved = false;
        for v in 0..n {
            counts.iter_mut().for_each(|x| *x = 0);
            let mut deg = 0;
            for &w in g.neighbors(v) {
                if classes[w] == classes[v] {
                    counts[sub[w] as usize] += 1;
                    deg += 1;
                }
            }
            if counts[sub[v] as usize] > deg / c {
                let best = crate::par::argmin(&counts).expect("at least one part");
                sub[v] = best as u32;
                moved = true;
            }
        }
    }
    sub
}

/// Renumbers colors to `0..count` in order of first use.
fn compact(colors: &mut [u32]) -> usize {
    let mut map = alloc::collections::BTreeMap::new();
    for c in colors.iter_mut() {
        let next = map.len() as u32;
        *c = *map.entry(*c).or_insert(next);
    }
    map.len()
}
