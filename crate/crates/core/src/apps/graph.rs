use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A `d`-uniform hypergraph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    n: usize,
    d: usize,
    edges: Vec<Vec<usize>>,
}

impl Hypergraph {
    pub fn new(n: usize, d: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        for e in &edges {
            if e.len() != d {
                return Err(Error::Dimension { expected: d, found: e.len() });
            }
            if let Some(&bad) = e.iter().find(|&&v| v >= n) {
                return Err(Error::OutOfRange { index: bad, bound: n });
            }
            let mut s = e.clone();
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Parameter(alloc::format!("edge {e:?} repeats a vertex")));
            }
        }
        Ok(Self { n, d, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn rainbow_count(&self, colors: &[u32]) -> usize {
        self.edges
            .iter()
            .filter(|e| {
                let mut c: Vec<u32> = e.iter().map(|&v| colors[v]).collect();
                c.sort_unstable();
                c.windows(2).all(|w| w[0] != w[1])
            })
            .count()
    }
}

/// A simple undirected graph with sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = alloc::vec![Vec::new(); n];
        let mut list = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::OutOfRange { index: u.max(v), bound: n });
            }
            if u == v {
                return Err(Error::Parameter(alloc::format!("self-loop at {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
            list.push((u.min(v), u.max(v)));
        }
        for (u, a) in adj.iter_mut().enumerate() {
            a.sort_unstable();
            if a.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Parameter(alloc::format!("repeated edge at vertex {u}")));
            }
        }
        Ok(Self { adj, edges: list })
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `Some(k)` if every vertex has degree `k`.
    pub fn regular_degree(&self) -> Option<usize> {
        let k = self.adj.first().map_or(0, Vec::len);
        self.adj.iter().all(|a| a.len() == k).then_some(k)
    }

    /// Largest number of neighbours sharing a vertex's color.
    pub fn max_defect(&self, colors: &[u32]) -> usize {
        (0..self.n()).map(|v| self.same_color_degree(v, colors)).max().unwrap_or(0)
    }

    pub fn same_color_degree(&self, v: usize, colors: &[u32]) -> usize {
        self.adj[v].iter().filter(|&&w| colors[w] == colors[v]).count()
    }

    /// Whether every closed neighbourhood sees all colors `0..c`.
    pub fn is_domatic(&self, colors: &[u32], c: u32) -> bool {
        (0..self.n()).all(|v| {
            let mut seen = alloc::vec![false; c as usize];
            for &w in self.adj[v].iter().chain(core::iter::once(&v)) {
                if let Some(s) = seen.get_mut(colors[w] as usize) {
                    *s = true;
                }
            }
            seen.iter().all(|&s| s)
        })
    }
}
