use crate::error::{invalid, Result};
use crate::graph::WeightedGraph;
use crate::model::PercConfig;
use crate::rng::RngStream;
use crate::samplers::Environment;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Green edges of the ghost field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GreenSet {
    pub bits: Vec<bool>,
}

/// Each edge not touching the boundary vertex is green with probability
/// `1 − e^{−hJ_e}`, independently.
pub fn sample_ghost(g: &WeightedGraph, hg: f64, rng: &mut RngStream) -> Result<GreenSet> {
    if !(hg > 0.0) {
        return invalid("ghost intensity must be positive");
    }
    let b = g.boundary();
    let bits = g
        .edges()
        .iter()
        .map(|e| {
            let u = rng.uniform();
            Some(e.u) != b && Some(e.v) != b && u < -(-hg * e.j).exp_m1()
        })
        .collect();
    Ok(GreenSet { bits })
}

fn check_open_unit(p: f64, e: usize) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return invalid(format!("environment value {p} on touched edge {e} is outside (0, 1)"));
    }
    Ok(())
}

/// Fluctuation `h_p(K)` of the subgraph formed by the vertex set `cluster` and its
/// open edges: `Σ_{e ∈ E(K)} √J_e (√(p/(1−p)) 1(e ∈ ∂K) − √((1−p)/p) 1(e open))`.
pub fn fluctuation(g: &WeightedGraph, cluster: &[bool], w: &PercConfig, env: &Environment) -> Result<f64> {
    let mut z = 0.0;
    for (e, ed) in g.edges().iter().enumerate() {
        if !(cluster[ed.u] || cluster[ed.v]) {
            continue;
        }
        let p = env.p[e];
        check_open_unit(p, e)?;
        z += increment(ed.j, p, w.open[e]);
    }
    Ok(z)
}

#[inline]
fn increment(j: f64, p: f64, open: bool) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    if open {
        -(j * (1.0 - p) / p).sqrt()
    } else {
        (j * p / (1.0 - p)).sqrt()
    }
}

/// One revealed edge of the exploration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExplorationStep {
    pub edge: usize,
    pub open: bool,
    /// Martingale value after this step.
    pub z: f64,
    /// Quadratic variation after this step.
    pub q: f64,
}

/// Edge-by-edge exploration of a cluster in the fixed order of edge ids.
///
/// `Q` accumulates `J_e` for every revealed edge with `p_e ∈ (0, 1)`; edges with
/// `p_e ∈ {0, 1}` are deterministic and add nothing to `Z` or `Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExplorationTrace {
    pub steps: Vec<ExplorationStep>,
    /// Vertex indicator of the explored cluster.
    pub cluster: Vec<bool>,
    /// `|E(K)|_J`: total weight of the edges touching the cluster.
    pub touched_weight: f64,
}

impl ExplorationTrace {
    /// Stopping index `T`.
    pub fn t(&self) -> usize {
        self.steps.len()
    }

    pub fn z_final(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.z)
    }

    pub fn q_final(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.q)
    }

    /// `sup{Z_n² : Q_n ≤ λ}` (with `Z_0 = 0`).
    pub fn sup_sq_below(&self, lambda: f64) -> f64 {
        let mut best = 0.0f64;
        // Q_n is predictable: the value after step n is known before step n.
        for s in &self.steps {
            if s.q > lambda {
                break;
            }
            best = best.max(s.z * s.z);
        }
        best
    }

    pub fn sup_abs(&self) -> f64 {
        self.steps.iter().fold(0.0f64, |m, s| m.max(s.z.abs()))
    }

    /// `E(K)`: every revealed edge touches the cluster.
    pub fn touched_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.steps.iter().map(|s| s.edge)
    }
}

/// Explores the cluster of `start`: repeatedly reveals the smallest-id unrevealed edge
/// touching the current vertex set.
pub fn explore_cluster(g: &WeightedGraph, env: &Environment, w: &PercConfig, start: usize) -> Result<ExplorationTrace> {
    if start >= g.vertex_count() {
        return invalid("start vertex is not in the graph");
    }
    if g.degree(start) == 0 {
        return invalid("start vertex has no incident edge");
    }
    let mut cluster = vec![false; g.vertex_count()];
    let mut revealed = vec![false; g.edge_count()];
    let mut heap = BinaryHeap::new();
    let mut steps = Vec::new();
    let (mut z, mut q, mut touched) = (0.0, 0.0, 0.0);
    cluster[start] = true;
    for &(e, _) in g.incident(start) {
        heap.push(Reverse(e));
    }
    while let Some(Reverse(e)) = heap.pop() {
        if revealed[e] {
            continue;
        }
        revealed[e] = true;
        let ed = g.edge(e);
        let (p, open) = (env.p[e], w.open[e]);
        touched += ed.j;
        z += increment(ed.j, p, open);
        if p > 0.0 && p < 1.0 {
            q += ed.j;
        }
        steps.push(ExplorationStep { edge: e, open, z, q });
        if open {
            for x in [ed.u, ed.v] {
                if !cluster[x] {
                    cluster[x] = true;
                    for &(f, _) in g.incident(x) {
                        if !revealed[f] {
                            heap.push(Reverse(f));
                        }
                    }
                }
            }
        }
    }
    Ok(ExplorationTrace { steps, cluster, touched_weight: touched })
}
