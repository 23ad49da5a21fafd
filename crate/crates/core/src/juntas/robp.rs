use alloc::vec::Vec;

use super::oracle::ContinuousPeo;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::gf2core::BitVec;

/// One decision node: read variable `var`, go to `lo` on 0 and `hi` on 1.
/// Targets `0..nodes.len()` are decision nodes; the rest index the sinks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RobpNode {
    pub var: usize,
    pub lo: usize,
    pub hi: usize,
}

/// A validated read-once branching program with valued sinks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Robp {
    vars: usize,
    nodes: Vec<RobpNode>,
    sinks: Vec<Dyadic>,
    start: usize,
    order: Vec<usize>,
}

impl Robp {
    pub fn new(vars: usize, nodes: Vec<RobpNode>, sinks: Vec<Dyadic>, start: usize) -> Result<Self> {
        let total = nodes.len() + sinks.len();
        if start >= total {
            return Err(Error::OutOfRange { index: start, bound: total });
        }
        for node in &nodes {
            if node.var >= vars {
                return Err(Error::OutOfRange { index: node.var, bound: vars });
            }
            for t in [node.lo, node.hi] {
                if t >= total {
                    return Err(Error::OutOfRange { index: t, bound: total });
                }
            }
        }
        let order = topological_order(&nodes, start)?;
        check_read_once(vars, &nodes, &order)?;
        Ok(Self { vars, nodes, sinks, start, order })
    }

    /// The constant program.
    pub fn constant(vars: usize, value: Dyadic) -> Self {
        Self { vars, nodes: Vec::new(), sinks: alloc::vec![value], start: 0, order: Vec::new() }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn nodes(&self) -> &[RobpNode] {
        &self.nodes
    }

    pub fn sinks(&self) -> &[Dyadic] {
        &self.sinks
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn eval(&self, x: &BitVec) -> Dyadic {
        let mut at = self.start;
        while at < self.nodes.len() {
            let node = self.nodes[at];
            at = if x.get(node.var) { node.hi } else { node.lo };
        }
        self.sinks[at - self.nodes.len()].clone()
    }

    /// Probability of reaching each sink when variable `i` is 1 with
    /// probability `q[i]`, independently.
    pub fn sink_probabilities(&self, q: &[Dyadic]) -> Result<Vec<Dyadic>> {
        if q.len() != self.vars {
            return Err(Error::Dimension { expected: self.vars, found: q.len() });
        }
        let one = Dyadic::one();
        let mut mass = alloc::vec![Dyadic::zero(); self.nodes.len() + self.sinks.len()];
        mass[self.start] = one.clone();
        for &v in &self.order {
            let node = self.nodes[v];
            let here = core::mem::take(&mut mass[v]);
            if here.is_zero() {
                continue;
            }
            let up = &here * &q[node.var];
            let down = &here * &(&one - &q[node.var]);
            mass[node.hi] += &up;
            mass[node.lo] += &down;
        }
        Ok(mass.split_off(self.nodes.len()))
    }
}

/// Exact `E[value]` under independent Bernoulli inputs.
pub fn robp_expectation(program: &Robp, q: &[Dyadic]) -> Result<Dyadic> {
    let probs = program.sink_probabilities(q)?;
    Ok(probs.iter().zip(&program.sinks).map(|(p, v)| p * v).sum())
}

/// Decision nodes reachable from `start`, parents before children.
fn topological_order(nodes: &[RobpNode], start: usize) -> Result<Vec<usize>> {
    let n = nodes.len();
    // 0 = unseen, 1 = on stack, 2 = done.
    let mut state = alloc::vec![0u8; n];
    let mut post = Vec::new();
    if start >= n {
        return Ok(post);
    }
    let mut stack: Vec<(usize, u8)> = alloc::vec![(start, 0)];
    state[start] = 1;
    while let Some(&mut (v, ref mut child)) = stack.last_mut() {
        if *child < 2 {
            let t = if *child == 0 { nodes[v].lo } else { nodes[v].hi };
            *child += 1;
            if t < n {
                match state[t] {
                    0 => {
                        state[t] = 1;
                        stack.push((t, 0));
                    }
                    1 => return Err(Error::Cycle(t)),
                    _ => {}
                }
            }
        } else {
            state[v] = 2;
            post.push(v);
            stack.pop();
        }
    }
    post.reverse();
    Ok(post)
}

/// Every variable is read at most once along every path: a node's variable
/// must not occur among the variables read on any path into it.
fn check_read_once(vars: usize, nodes: &[RobpNode], order: &[usize]) -> Result<()> {
    let mut seen: Vec<Option<BitVec>> = alloc::vec![None; nodes.len()];
    for &v in order {
        let above = seen[v].take().unwrap_or_else(|| BitVec::zeros(vars));
        let var = nodes[v].var;
        if above.get(var) {
            return Err(Error::ReadTwice { node: v, var });
        }
        let mut below = above.clone();
        below.set(var, true);
        for t in [nodes[v].lo, nodes[v].hi] {
            if t < nodes.len() {
                match &mut seen[t] {
                    Some(acc) => {
                        for i in below.iter_ones() {
                            acc.set(i, true);
                        }
                    }
                    slot @ None => *slot = Some(below.clone()),
                }
            }
        }
        seen[v] = Some(above);
    }
    Ok(())
}

/// ROBP-defined juntas: program `j` reads the support of `f_j` in order.
#[derive(Clone, Debug, Default)]
pub struct RobpBank {
    pub programs: Vec<Robp>,
}

impl ContinuousPeo for RobpBank {
    fn expectation(&self, j: usize, q: &[Dyadic]) -> Result<Dyadic> {
        let p = self.programs.get(j).ok_or(Error::OutOfRange { index: j, bound: self.programs.len() })?;
        robp_expectation(p, q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn threshold_two_of_three() -> Robp {
        // Node 1 means "one 1 seen so far", node 2 "none"; 4 and 5 are sinks.
        let nodes = vec![
            RobpNode { var: 0, lo: 2, hi: 1 },
            RobpNode { var: 1, lo: 3, hi: 5 },
            RobpNode { var: 1, lo: 4, hi: 3 },
            RobpNode { var: 2, lo: 4, hi: 5 },
        ];
        Robp::new(3, nodes, vec![Dyadic::zero(), Dyadic::one()], 0).unwrap()
    }

    #[test]
    fn constant_and_single_variable() {
        let c = Robp::constant(2, Dyadic::new(3, 1));
        assert_eq!(robp_expectation(&c, &[Dyadic::half(), Dyadic::one()]).unwrap(), Dyadic::new(3, 1));
        let x = Robp::new(1, vec![RobpNode { var: 0, lo: 1, hi: 2 }], vec![Dyadic::zero(), Dyadic::one()], 0).unwrap();
        assert_eq!(robp_expectation(&x, &[Dyadic::new(1, 2)]).unwrap(), Dyadic::new(1, 2));
    }

    #[test]
    fn majority_of_three() {
        let p = threshold_two_of_three();
        assert_eq!(robp_expectation(&p, &vec![Dyadic::half(); 3]).unwrap(), Dyadic::half());
        for v in 0..8u64 {
            let x = BitVec::from_u64(v, 3);
            assert_eq!(p.eval(&x), Dyadic::from_int((v.count_ones() >= 2) as i64));
        }
    }

    #[test]
    fn rejects_cycles_and_double_reads() {
        let cyc = vec![RobpNode { var: 0, lo: 1, hi: 2 }, RobpNode { var: 1, lo: 0, hi: 2 }];
        assert_eq!(Robp::new(2, cyc, vec![Dyadic::one()], 0), Err(Error::Cycle(0)));
        let twice = vec![RobpNode { var: 0, lo: 1, hi: 2 }, RobpNode { var: 0, lo: 2, hi: 3 }];
        assert!(matches!(
            Robp::new(1, twice, vec![Dyadic::zero(), Dyadic::one()], 0),
            Err(Error::ReadTwice { node: 1, var: 0 })
        ));
    }
}
