use super::{guard_bits, BlockSum};
use crate::error::{invalid, Result};
use crate::graph::{FieldGraph, WeightedGraph};
use crate::model::ModelParams;

/// Fundamental cycles of a spanning forest, as edge masks.
///
/// The even subgraphs of `g` are exactly the XOR-combinations of the returned masks.
pub fn cycle_basis(g: &WeightedGraph) -> Result<Vec<u64>> {
    let m = g.edge_count();
    if m > 64 {
        return invalid("cycle basis supports at most 64 edges");
    }
    let n = g.vertex_count();
    // parent edge and depth from a BFS forest
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut depth = vec![usize::MAX; n];
    let mut tree = vec![false; m];
    for s in 0..n {
        if depth[s] != usize::MAX {
            continue;
        }
        depth[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &(e, y) in g.incident(x) {
                if depth[y] == usize::MAX {
                    depth[y] = depth[x] + 1;
                    parent[y] = Some(e);
                    tree[e] = true;
                    queue.push_back(y);
                }
            }
        }
    }
    let mut basis = Vec::new();
    for e in 0..m {
        if tree[e] {
            continue;
        }
        let ed = g.edge(e);
        let mut mask = 1u64 << e;
        let (mut a, mut b) = (ed.u, ed.v);
        while a != b {
            if depth[a] < depth[b] {
                std::mem::swap(&mut a, &mut b);
            }
            let pe = parent[a].expect("non-root vertex has a parent edge");
            mask ^= 1u64 << pe;
            a = g.edge(pe).other(a);
        }
        basis.push(mask);
    }
    Ok(basis)
}

/// Exact loop O(1) law: each even subgraph of the working graph with its probability.
#[derive(Clone, Debug)]
pub struct LoopDistribution {
    pub edge_count: usize,
    pub masks: Vec<u64>,
    pub probs: Vec<f64>,
}

impl LoopDistribution {
    /// `L(ω(x) = 0 for every x in a)`.
    pub fn prob_closed_on(&self, a: u64) -> f64 {
        let mut s = BlockSum::new();
        for (m, p) in self.masks.iter().zip(&self.probs) {
            if m & a == 0 {
                s.add(*p);
            }
        }
        s.total()
    }

    pub fn prob(&self, mask: u64) -> f64 {
        self.masks.iter().position(|&m| m == mask).map_or(0.0, |i| self.probs[i])
    }

    pub fn edge_marginal(&self, e: usize) -> f64 {
        1.0 - self.prob_closed_on(1u64 << e)
    }
}

/// Loop O(1) law on a graph at zero field, weights `∏ tanh(βJ_e)`.
pub fn loop_distribution_on(g: &WeightedGraph, beta: f64) -> Result<LoopDistribution> {
    let t: Vec<f64> = g.edges().iter().map(|e| (beta * e.j).tanh()).collect();
    loop_distribution_with(g, &t)
}

/// Loop law with arbitrary per-edge weights `t_e` in `[0, 1]`.
pub fn loop_distribution_with(g: &WeightedGraph, t: &[f64]) -> Result<LoopDistribution> {
    if t.len() != g.edge_count() {
        return invalid("one loop weight per edge is required");
    }
    let basis = cycle_basis(g)?;
    guard_bits("loop enumeration", basis.len())?;
    let total = 1u64 << basis.len();
    let mut masks = Vec::with_capacity(total as usize);
    let mut weights = Vec::with_capacity(total as usize);
    let mut z = BlockSum::new();
    let mut mask = 0u64;
    for step in 0..total {
        if step > 0 {
            mask ^= basis[step.trailing_zeros() as usize];
        }
        let mut w = 1.0;
        let mut rest = mask;
        while rest != 0 {
            let e = rest.trailing_zeros() as usize;
            w *= t[e];
            rest &= rest - 1;
        }
        z.add(w);
        masks.push(mask);
        weights.push(w);
    }
    let z = z.total();
    let probs = weights.into_iter().map(|w| w / z).collect();
    Ok(LoopDistribution { edge_count: g.edge_count(), masks, probs })
}

/// Loop O(1) law of `g` at `(β, h)`; vertex openings are the field edges of the
/// natural working graph, which is returned alongside.
pub fn loop_distribution(g: &WeightedGraph, p: &ModelParams) -> Result<(FieldGraph, LoopDistribution)> {
    let fg = FieldGraph::natural(g, p.h)?;
    let d = loop_distribution_on(&fg.graph, p.beta)?;
    Ok((fg, d))
}
