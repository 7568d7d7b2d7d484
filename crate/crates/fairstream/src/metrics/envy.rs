use std::cmp::Reverse;
use std::collections::BinaryHeap;

use thiserror::Error;

use super::REL_TOL;
use crate::state::AllocationState;

/// `a > b` beyond relative tolerance.
pub fn strictly_greater(a: f64, b: f64) -> bool {
    a - b > REL_TOL * a.abs().max(b.abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvyEdge {
    pub from: usize,
    pub to: usize,
    /// v_from(A_to) - v_from(A_from).
    pub magnitude: f64,
}

/// Edge (i, j) whenever agent i strictly prefers A_j to A_i.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvyGraph {
    pub n: usize,
    pub edges: Vec<EnvyEdge>,
}

impl EnvyGraph {
    pub fn from_edges(n: usize, pairs: &[(usize, usize)]) -> Self {
        EnvyGraph {
            n,
            edges: pairs
                .iter()
                .map(|&(from, to)| EnvyEdge {
                    from,
                    to,
                    magnitude: 0.0,
                })
                .collect(),
        }
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.edges.iter().filter(|e| e.from == i).count()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.iter().any(|e| e.from == i && e.to == j)
    }
}

pub fn build_envy_graph(state: &AllocationState) -> EnvyGraph {
    let n = state.n();
    let mut edges = Vec::new();
    for i in 0..n {
        let own = state.value_of(i, i);
        for j in 0..n {
            let other = state.value_of(i, j);
            if i != j && strictly_greater(other, own) {
                edges.push(EnvyEdge {
                    from: i,
                    to: j,
                    magnitude: other - own,
                });
            }
        }
    }
    EnvyGraph { n, edges }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("envy graph has a cycle through agents {cycle:?}")]
pub struct CycleError {
    /// Agents along the cycle, each envying the next and the last the first.
    pub cycle: Vec<usize>,
}

/// Kahn's algorithm, always emitting the smallest ready agent.
///
/// Returns agents in order; every edge points from an earlier agent to a
/// later one.
pub fn topo_sort(graph: &EnvyGraph) -> Result<Vec<usize>, CycleError> {
    let n = graph.n;
    let mut succ = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    for e in &graph.edges {
        succ[e.from].push(e.to);
        indeg[e.to] += 1;
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&v| indeg[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = ready.pop() {
        order.push(v);
        for &w in &succ[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                ready.push(Reverse(w));
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    // Every leftover vertex has a leftover predecessor; walk back to a repeat.
    let mut pred = vec![usize::MAX; n];
    for e in &graph.edges {
        if indeg[e.from] > 0 && indeg[e.to] > 0 && pred[e.to] == usize::MAX {
            pred[e.to] = e.from;
        }
    }
    let start = (0..n).find(|&v| indeg[v] > 0).expect("leftover vertex");
    let mut seen = vec![false; n];
    let mut v = start;
    while !seen[v] {
        seen[v] = true;
        v = pred[v];
    }
    let mut cycle = vec![v];
    let mut w = pred[v];
    while w != v {
        cycle.push(w);
        w = pred[w];
    }
    cycle.reverse();
    Err(CycleError { cycle })
}
