use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::graph::Graph;
use crate::error::{Error, Result};
use crate::juntas::PartialValue;
use crate::lll::{deterministic_mt, BadEvent, CountEvent, Event, LllInstance, MtConfig};
use crate::util::ceil_log2;

/// Values below `2^r` projected to `c` colors as `floor(c u / 2^r)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Projection {
    pub colors: usize,
    pub r: u32,
}

impl Projection {
    pub fn new(colors: usize) -> Self {
        Self { colors, r: ceil_log2(colors as u64) + 8 }
    }

    pub fn color(&self, u: u32) -> u32 {
        ((u as u64 * self.colors as u64) >> self.r) as u32
    }

    /// Values mapped to color `j`.
    pub fn range(&self, j: usize) -> (u64, u64) {
        let start = |j: usize| ((j as u64) << self.r).div_ceil(self.colors as u64);
        (start(j), start(j + 1))
    }
}

/// Overrides for the phase constants, for runs below the asymptotic range.
#[derive(Clone, Debug, Default)]
pub struct DomaticHooks {
    pub c1: Option<usize>,
    pub c2: Option<usize>,
    pub mu: Option<f64>,
    pub t0: Option<f64>,
    pub t1: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct DomaticConfig {
    pub phi: f64,
    pub mt: MtConfig,
    pub hooks: DomaticHooks,
}

impl Default for DomaticConfig {
    fn default() -> Self {
        Self { phi: 10.0, mt: MtConfig::default(), hooks: DomaticHooks::default() }
    }
}

#[derive(Clone, Debug)]
pub struct DomaticOutcome {
    /// Class of each vertex in `0..size`.
    pub colors: Vec<u32>,
    pub size: usize,
    pub c1: usize,
    pub c2: usize,
    pub t0: f64,
    pub t1: f64,
    /// Set when the partition fell back to a single class.
    pub note: Option<String>,
}

/// Partition of a regular graph into classes that each dominate the graph.
pub fn domatic_partition(g: &Graph, eta: f64, cfg: &DomaticConfig) -> Result<DomaticOutcome> {
    let k = g.regular_degree().ok_or_else(|| Error::Parameter("domatic partition needs a regular graph".into()))?;
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Parameter(alloc::format!("eta = {eta} outside (0, 1)")));
    }
    let n = g.n();
    let lk = libm::log(k.max(1) as f64);
    let h = &cfg.hooks;
    let c1 = h.c1.unwrap_or(if lk > 0.0 { libm::floor(k as f64 / (lk * lk * lk)) as usize } else { 0 });
    let c2 = h.c2.unwrap_or(libm::floor((1.0 - eta) * lk * lk) as usize);
    let mu = h.mu.unwrap_or(lk * lk * lk);
    let t0 = h.t0.unwrap_or(mu - cfg.phi * lk * lk);
    let t1 = h.t1.unwrap_or(mu + cfg.phi * lk * lk);
    let mt = MtConfig { epsilon: eta / 2.0, ..cfg.mt.clone() };
    let trivial = |why: String| DomaticOutcome { colors: alloc::vec![0; n], size: 1, c1, c2, t0, t1, note: Some(why) };

    if c1 == 0 || c2 == 0 {
        return Ok(trivial(alloc::format!("c1 = {c1}, c2 = {c2} at degree {k}")));
    }

    let p1 = Projection::new(c1);
    let mut events = Vec::new();
    for v in 0..n {
        let nb = g.neighbors(v);
        let bad: Vec<bool> = (0..=nb.len()).map(|x| x as f64 <= t0 || x as f64 >= t1).collect();
        for j in 0..c1 {
            let ev = CountEvent { ranges: alloc::vec![p1.range(j); nb.len()], bad: bad.clone() };
            if !ev.probability(&alloc::vec![PartialValue::UNKNOWN; nb.len()], p1.r)?.is_zero() {
                events.push(Event::new(nb.to_vec(), Arc::new(ev), None));
            }
        }
    }
    let phase1 = match solve_phase(n, p1.r, events, &mt)? {
        Some(x) => x,
        None => return Ok(trivial(String::from("phase I fails the LLL condition"))),
    };
    let chi1: Vec<u32> = phase1.iter().map(|&u| p1.color(u)).collect();

    let p2 = Projection::new(c2);
    let mut events = Vec::new();
    for v in 0..n {
        for j in 0..c1 as u32 {
            let part: Vec<usize> = g.neighbors(v).iter().copied().filter(|&w| chi1[w] == j).collect();
            for jj in 0..c2 {
                let mut bad = alloc::vec![false; part.len() + 1];
                bad[0] = true;
                events.push(Event::new(
                    part.clone(),
                    Arc::new(CountEvent { ranges: alloc::vec![p2.range(jj); part.len()], bad }),
                    None,
                ));
            }
        }
    }
    let phase2 = match solve_phase(n, p2.r, events, &mt)? {
        Some(x) => x,
        None => return Ok(trivial(String::from("phase II fails the LLL condition"))),
    };
    let colors: Vec<u32> = chi1.iter().zip(&phase2).map(|(&a, &u)| a * c2 as u32 + p2.color(u)).collect();
    let size = c1 * c2;
    if !g.is_domatic(&colors, size as u32) {
        return Err(Error::Verification("some closed neighbourhood misses a class".into()));
    }
    Ok(DomaticOutcome { colors, size, c1, c2, t0, t1, note: None })
}

fn solve_phase(n: usize, r: u32, events: Vec<Event>, mt: &MtConfig) -> Result<Option<Vec<u32>>> {
    let inst = LllInstance::new(n, r, events)?;
    match deterministic_mt(&inst, mt) {
        Ok(out) => Ok(Some(out.assignment)),
        Err(Error::LllCondition { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circulant(n: usize, half: usize) -> Graph {
        let edges: Vec<(usize, usize)> = (0..n).flat_map(|v| (1..=half).map(move |o| (v, (v + o) % n))).collect();
        Graph::new(n, &edges).unwrap()
    }

    #[test]
    fn projection_ranges_partition() {
        let p = Projection::new(3);
        assert_eq!(p.r, 10);
        let mut next = 0;
        for j in 0..3 {
            let (lo, hi) = p.range(j);
            assert_eq!(lo, next);
            assert!((lo..hi).all(|u| p.color(u as u32) == j as u32));
            next = hi;
        }
        assert_eq!(next, 1 << 10);
    }

    #[test]
    fn complete_graph_classes() {
        let k4 = Graph::new(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert_eq!(k4.regular_degree(), Some(3));
        assert!(k4.is_domatic(&[0, 0, 1, 1], 2));
        assert!(!k4.is_domatic(&[0, 0, 0, 1], 3));
    }

    #[test]
    fn small_degree_falls_back() {
        let out = domatic_partition(&circulant(10, 2), 0.5, &DomaticConfig::default()).unwrap();
        assert_eq!(out.size, 1);
        assert!(out.note.is_some());
        assert!(domatic_partition(&Graph::new(3, &[(0, 1)]).unwrap(), 0.5, &DomaticConfig::default()).is_err());
    }

    #[test]
    fn forced_constants() {
        let g = circulant(24, 6);
        let hooks = DomaticHooks { c1: Some(1), c2: Some(2), t0: Some(0.0), t1: Some(13.0), ..DomaticHooks::default() };
        let out = domatic_partition(&g, 0.5, &DomaticConfig { hooks, ..DomaticConfig::default() }).unwrap();
        assert_eq!((out.size, out.note.clone()), (2, None));
        assert!(g.is_domatic(&out.colors, 2));
    }
}
