use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::instance::LllInstance;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::par::map_indexed;

/// Default cap on trees visited by one enumeration.
pub const DEFAULT_TREE_BUDGET: usize = 200_000;

/// `(variable, occurrence)` pairs, at most one per variable, ascending by
/// variable. Occurrences are 1-based table columns.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slice {
    entries: Vec<(usize, usize)>,
}

impl Slice {
    pub fn new(mut entries: Vec<(usize, usize)>) -> Result<Self> {
        entries.sort_unstable();
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Parameter("a slice holds at most one occurrence per variable".into()));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn occurrence(&self, var: usize) -> Option<usize> {
        self.entries.binary_search_by_key(&var, |e| e.0).ok().map(|k| self.entries[k].1)
    }
}

/// A labelled rooted tree before slices are attached. `parents[v]` is `None`
/// for the root only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeShape {
    pub labels: Vec<usize>,
    pub parents: Vec<Option<usize>>,
}

/// A proper witness tree in canonical order: by depth, then label. Nodes at
/// equal depth carry unrelated labels, so the order is unique.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WitnessTree {
    labels: Vec<usize>,
    parents: Vec<Option<usize>>,
    depth: Vec<usize>,
    slices: Vec<Slice>,
    weight: Dyadic,
}

impl WitnessTree {
    pub fn empty() -> Self {
        Self { labels: Vec::new(), parents: Vec::new(), depth: Vec::new(), slices: Vec::new(), weight: Dyadic::one() }
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parents
    }

    pub fn depth(&self) -> &[usize] {
        &self.depth
    }

    pub fn slices(&self) -> &[Slice] {
        &self.slices
    }

    /// Product of the nodes' probability bounds.
    pub fn weight(&self) -> &Dyadic {
        &self.weight
    }

    pub fn shape(&self) -> TreeShape {
        TreeShape { labels: self.labels.clone(), parents: self.parents.clone() }
    }

    /// Sizes of the subtrees hanging off the root.
    pub fn root_subtree_sizes(&self) -> Vec<usize> {
        let mut top = alloc::vec![usize::MAX; self.size()];
        let mut sizes = BTreeMap::new();
        for v in 1..self.size() {
            let p = self.parents[v].expect("only the root lacks a parent");
            top[v] = if p == 0 { v } else { top[p] };
            *sizes.entry(top[v]).or_insert(0usize) += 1;
        }
        sizes.into_values().collect()
    }

    /// `(i, u_{i,v} + 1)` for `i` in `Y_{L(v)}`, where `u_{i,v}` counts
    /// strictly deeper nodes whose support contains `i`.
    fn attach(inst: &LllInstance, labels: Vec<usize>, parents: Vec<Option<usize>>, depth: Vec<usize>) -> Self {
        let size = labels.len();
        let mut slices = alloc::vec![Slice { entries: Vec::new() }; size];
        let mut deeper: BTreeMap<usize, usize> = BTreeMap::new();
        let mut v = size;
        while v > 0 {
            // Nodes are sorted by depth; handle one level at a time.
            let d = depth[v - 1];
            let mut start = v;
            while start > 0 && depth[start - 1] == d {
                start -= 1;
            }
            for u in start..v {
                let entries =
                    inst.event(labels[u]).vars.iter().map(|&i| (i, deeper.get(&i).copied().unwrap_or(0) + 1)).collect();
                slices[u] = Slice::new(entries).expect("supports have distinct variables");
            }
            for &label in &labels[start..v] {
                for &i in &inst.event(label).vars {
                    *deeper.entry(i).or_insert(0) += 1;
                }
            }
            v = start;
        }
        let weight = labels.iter().fold(Dyadic::one(), |w, &l| &w * &inst.event(l).p_bound);
        Self { labels, parents, depth, slices, weight }
    }
}

/// Validates a shape against the instance and attaches slices.
pub fn build_slices(inst: &LllInstance, shape: &TreeShape) -> Result<WitnessTree> {
    let size = shape.labels.len();
    if shape.parents.len() != size {
        return Err(Error::Dimension { expected: size, found: shape.parents.len() });
    }
    if size == 0 {
        return Ok(WitnessTree::empty());
    }
    if let Some(&bad) = shape.labels.iter().find(|&&l| l >= inst.m()) {
        return Err(Error::OutOfRange { index: bad, bound: inst.m() });
    }
    let roots: Vec<usize> = (0..size).filter(|&v| shape.parents[v].is_none()).collect();
    if roots.len() != 1 {
        return Err(Error::Parameter(alloc::format!("a witness tree needs one root, found {}", roots.len())));
    }
    let mut depth = alloc::vec![0usize; size];
    for (v, dv) in depth.iter_mut().enumerate() {
        let mut at = v;
        while let Some(p) = shape.parents[at] {
            if p >= size {
                return Err(Error::OutOfRange { index: p, bound: size });
            }
            *dv += 1;
            if *dv > size {
                return Err(Error::Parameter("witness tree parents form a cycle".into()));
            }
            at = p;
        }
    }
    for v in 0..size {
        if let Some(p) = shape.parents[v] {
            if !inst.related(shape.labels[v], shape.labels[p]) {
                return Err(Error::Parameter(alloc::format!(
                    "child label {} is unrelated to parent label {}",
                    shape.labels[v],
                    shape.labels[p]
                )));
            }
        }
    }
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by_key(|&v| (depth[v], shape.labels[v]));
    for (a, &u) in order.iter().enumerate() {
        for &v in &order[a + 1..] {
            if depth[v] != depth[u] {
                break;
            }
            if inst.related(shape.labels[u], shape.labels[v]) {
                return Err(Error::Parameter(alloc::format!("related labels share depth {}", depth[u])));
            }
        }
    }
    let mut rank = alloc::vec![0usize; size];
    for (k, &v) in order.iter().enumerate() {
        rank[v] = k;
    }
    let labels = order.iter().map(|&v| shape.labels[v]).collect();
    let parents = order.iter().map(|&v| shape.parents[v].map(|p| rank[p])).collect();
    let depth = order.iter().map(|&v| depth[v]).collect();
    Ok(WitnessTree::attach(inst, labels, parents, depth))
}

/// The witness tree of step `t` of an execution log: walk the log backwards
/// and hang each related event under the deepest related node.
pub fn witness_tree_of(inst: &LllInstance, log: &[usize], t: usize) -> WitnessTree {
    witness_tree_capped(inst, log, t, usize::MAX).expect("no cap")
}

/// As [`witness_tree_of`], but gives up once the tree exceeds `cap` nodes.
pub fn witness_tree_capped(inst: &LllInstance, log: &[usize], t: usize, cap: usize) -> Option<WitnessTree> {
    let mut labels = alloc::vec![log[t]];
    let mut parents = alloc::vec![None];
    let mut depth = alloc::vec![0usize];
    for s in (0..t).rev() {
        let e = log[s];
        let mut best: Option<usize> = None;
        for v in 0..labels.len() {
            if inst.related(e, labels[v]) && best.is_none_or(|b| depth[v] > depth[b]) {
                best = Some(v);
            }
        }
        if let Some(p) = best {
            if labels.len() == cap {
                return None;
            }
            labels.push(e);
            parents.push(Some(p));
            depth.push(depth[p] + 1);
        }
    }
    Some(build_slices(inst, &TreeShape { labels, parents }).expect("execution trees are proper"))
}

#[derive(Clone, Copy, Debug)]
struct Limits {
    min_size: usize,
    max_size: usize,
    /// Cap on each subtree hanging off the root.
    max_branch: usize,
    budget: usize,
}

struct Walker<'a> {
    inst: &'a LllInstance,
    limits: Limits,
    labels: Vec<usize>,
    parents: Vec<Option<usize>>,
    depth: Vec<usize>,
    branch: Vec<usize>,
    branch_size: Vec<usize>,
    visited: usize,
    out: Vec<WitnessTree>,
}

impl Walker<'_> {
    fn tree(&mut self, level: (usize, usize)) -> Result<()> {
        self.visited += 1;
        if self.visited > self.limits.budget {
            return Err(Error::Budget(alloc::format!(
                "witness-tree enumeration passed {} trees ({} emitted)",
                self.limits.budget,
                self.out.len()
            )));
        }
        if self.labels.len() >= self.limits.min_size {
            self.out.push(WitnessTree::attach(
                self.inst,
                self.labels.clone(),
                self.parents.clone(),
                self.depth.clone(),
            ));
        }
        if self.labels.len() >= self.limits.max_size {
            return Ok(());
        }
        let mut cands: Vec<usize> =
            (level.0..level.1).flat_map(|v| self.inst.neighbors(self.labels[v]).iter().copied()).collect();
        cands.sort_unstable();
        cands.dedup();
        self.level(level, &cands, 0, level.1)
    }

    /// Chooses the next level: each candidate is skipped or hung under one
    /// related parent, keeping the level pairwise unrelated.
    fn level(&mut self, prev: (usize, usize), cands: &[usize], k: usize, start: usize) -> Result<()> {
        if k == cands.len() {
            if self.labels.len() > start {
                let end = self.labels.len();
                self.tree((start, end))?;
            }
            return Ok(());
        }
        self.level(prev, cands, k + 1, start)?;
        let label = cands[k];
        if self.labels.len() >= self.limits.max_size
            || (start..self.labels.len()).any(|u| self.inst.related(label, self.labels[u]))
        {
            return Ok(());
        }
        for p in prev.0..prev.1 {
            if !self.inst.related(label, self.labels[p]) {
                continue;
            }
            let v = self.labels.len();
            let id = if p == 0 {
                self.branch_size.push(0);
                self.branch_size.len() - 1
            } else {
                self.branch[p]
            };
            if self.branch_size[id] + 1 > self.limits.max_branch {
                if p == 0 {
                    self.branch_size.pop();
                }
                continue;
            }
            self.branch_size[id] += 1;
            self.labels.push(label);
            self.parents.push(Some(p));
            self.depth.push(self.depth[p] + 1);
            self.branch.push(id);
            let r = self.level(prev, cands, k + 1, start);
            self.labels.pop();
            self.parents.pop();
            self.depth.pop();
            self.branch.pop();
            self.branch_size[id] -= 1;
            if p == 0 {
                self.branch_size.pop();
            }
            debug_assert_eq!(self.labels.len(), v);
            r?;
        }
        Ok(())
    }
}

fn enumerate(inst: &LllInstance, limits: Limits) -> Result<Vec<WitnessTree>> {
    if limits.max_size == 0 {
        return Ok(Vec::new());
    }
    let per_root: Vec<Result<Vec<WitnessTree>>> = map_indexed(inst.m(), |root| {
        let mut w = Walker {
            inst,
            limits,
            labels: alloc::vec![root],
            parents: alloc::vec![None],
            depth: alloc::vec![0],
            branch: alloc::vec![usize::MAX],
            branch_size: Vec::new(),
            visited: 0,
            out: Vec::new(),
        };
        w.tree((0, 1)).map(|_| w.out)
    });
    let mut out = Vec::new();
    for r in per_root {
        out.extend(r?);
        if out.len() > limits.budget {
            return Err(Error::Budget(alloc::format!(
                "witness-tree enumeration passed {} trees ({} emitted)",
                limits.budget,
                out.len()
            )));
        }
    }
    Ok(out)
}

/// All proper witness trees with at most `k` nodes.
pub fn enumerate_witness_trees(inst: &LllInstance, k: usize) -> Result<Vec<WitnessTree>> {
    enumerate_witness_trees_with(inst, k, DEFAULT_TREE_BUDGET)
}

pub fn enumerate_witness_trees_with(inst: &LllInstance, k: usize, budget: usize) -> Result<Vec<WitnessTree>> {
    enumerate(inst, Limits { min_size: 1, max_size: k, max_branch: usize::MAX, budget })
}

/// Proper trees with at least `k` nodes whose root subtrees all have fewer
/// than `k`. The first tree of size `k` or more to appear in any execution has
/// this form, since each root subtree lies inside an earlier witness tree.
pub fn enumerate_tail_trees(inst: &LllInstance, k: usize, budget: usize) -> Result<Vec<WitnessTree>> {
    let k = k.max(1);
    enumerate(inst, Limits { min_size: k, max_size: usize::MAX, max_branch: k - 1, budget })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lll::instance::{ClauseEvent, Event};
    use alloc::sync::Arc;
    use alloc::vec;

    fn clause_on(vars: Vec<usize>) -> Event {
        let zeros = vec![0; vars.len()];
        Event::new(vars, Arc::new(ClauseEvent::new(vec![zeros])), None)
    }

    #[test]
    fn slices_follow_deeper_counts() {
        let inst = LllInstance::new(4, 1, vec![clause_on(vec![1, 3])]).unwrap();
        let t = build_slices(&inst, &TreeShape { labels: vec![0], parents: vec![None] }).unwrap();
        assert_eq!(t.slices()[0].entries(), &[(1, 1), (3, 1)]);

        let inst = LllInstance::new(4, 1, vec![clause_on(vec![1, 2]), clause_on(vec![2, 3])]).unwrap();
        let t = build_slices(&inst, &TreeShape { labels: vec![0, 1], parents: vec![None, Some(0)] }).unwrap();
        assert_eq!(t.slices()[1].entries(), &[(2, 1), (3, 1)]);
        assert_eq!(t.slices()[0].entries(), &[(1, 1), (2, 2)]);
        assert_eq!(t.weight(), &Dyadic::new(1, 4));
    }

    #[test]
    fn rejects_bad_shapes() {
        let inst = LllInstance::new(4, 1, vec![clause_on(vec![0]), clause_on(vec![1]), clause_on(vec![0, 2])]).unwrap();
        let unrelated = TreeShape { labels: vec![0, 1], parents: vec![None, Some(0)] };
        assert!(build_slices(&inst, &unrelated).is_err());
        let same_depth = TreeShape { labels: vec![2, 0, 2], parents: vec![None, Some(0), Some(0)] };
        assert!(build_slices(&inst, &same_depth).is_err());
        let cycle = TreeShape { labels: vec![0, 0, 0], parents: vec![None, Some(2), Some(1)] };
        assert!(build_slices(&inst, &cycle).is_err());
    }

    #[test]
    fn enumeration_counts() {
        let one = LllInstance::new(1, 1, vec![clause_on(vec![0])]).unwrap();
        let trees = enumerate_witness_trees(&one, 3).unwrap();
        assert_eq!(trees.iter().map(WitnessTree::size).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert!(trees.iter().all(|t| t.depth().iter().enumerate().all(|(v, &d)| d == v)));

        let two = LllInstance::new(2, 1, vec![clause_on(vec![0]), clause_on(vec![1])]).unwrap();
        assert_eq!(enumerate_witness_trees(&two, 1).unwrap().len(), 2);
    }

    #[test]
    fn slices_are_disjoint_and_sized() {
        let events = vec![clause_on(vec![0, 1]), clause_on(vec![1, 2]), clause_on(vec![2, 3]), clause_on(vec![3, 0])];
        let inst = LllInstance::new(4, 1, events).unwrap();
        let trees = enumerate_witness_trees(&inst, 4).unwrap();
        assert!(trees.len() > 50);
        for t in &trees {
            let mut all: Vec<(usize, usize)> = t.slices().iter().flat_map(|s| s.entries().iter().copied()).collect();
            let total = all.len();
            all.sort_unstable();
            all.dedup();
            assert_eq!(all.len(), total);
            for (v, s) in t.slices().iter().enumerate() {
                assert_eq!(s.len(), inst.event(t.labels()[v]).vars.len());
            }
            assert_eq!(build_slices(&inst, &t.shape()).unwrap(), *t);
        }
        let mut sorted = trees.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), trees.len());
    }

    #[test]
    fn tail_trees_have_small_branches() {
        let events = vec![clause_on(vec![0, 1]), clause_on(vec![1, 2]), clause_on(vec![2, 0])];
        let inst = LllInstance::new(3, 1, events).unwrap();
        let tail = enumerate_tail_trees(&inst, 3, DEFAULT_TREE_BUDGET).unwrap();
        assert!(!tail.is_empty());
        for t in &tail {
            assert!(t.size() >= 3);
            assert!(t.root_subtree_sizes().iter().all(|&s| s < 3));
        }
        // Single nodes are the whole tail at K = 1.
        assert!(enumerate_tail_trees(&inst, 1, DEFAULT_TREE_BUDGET).unwrap().iter().all(|t| t.size() == 1));
    }

    #[test]
    fn log_trees() {
        let inst =
            LllInstance::new(4, 1, vec![clause_on(vec![1, 2]), clause_on(vec![2, 3]), clause_on(vec![0])]).unwrap();
        let log = [0, 2, 1, 0];
        let t = witness_tree_of(&inst, &log, 3);
        // Root 0; step 2 (event 1) hangs under it; step 1 (event 2) is unrelated;
        // step 0 (event 0) hangs under the event-1 node.
        assert_eq!(t.labels(), &[0, 1, 0]);
        assert_eq!(t.parents(), &[None, Some(0), Some(1)]);
        assert_eq!(witness_tree_of(&inst, &log, 1).size(), 1);
    }
}
