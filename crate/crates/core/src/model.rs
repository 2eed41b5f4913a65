//! Model parameters and configuration containers.
//!
//! Percolation, current and loop configurations are indexed by the edges of the
//! working graph of a [`FieldGraph`](crate::graph::FieldGraph): the base edges
//! followed by one field edge per vertex carrying the external field. Use
//! [`FieldGraph::edge_element`](crate::graph::FieldGraph::edge_element) to map an
//! index to its element of `E ∪ V`.

use crate::error::{invalid, Result};
use crate::graph::WeightedGraph;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: f64,
    pub h: f64,
    /// Cluster weight of the random-cluster model.
    pub q: f64,
}

impl ModelParams {
    pub fn new(beta: f64, h: f64, q: f64) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return invalid("beta must be finite and non-negative");
        }
        if !(h >= 0.0 && h.is_finite()) {
            return invalid("h must be finite and non-negative");
        }
        if !(q >= 1.0 && q.is_finite()) {
            return invalid("q must be at least 1");
        }
        Ok(ModelParams { beta, h, q })
    }

    /// Ising parameters (`q = 2`).
    pub fn ising(beta: f64, h: f64) -> Result<Self> {
        ModelParams::new(beta, h, 2.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpinConfig {
    pub s: Vec<i8>,
}

impl SpinConfig {
    pub fn all_plus(n: usize) -> Self {
        SpinConfig { s: vec![1; n] }
    }

    /// `σ_u σ_v` of a working-graph edge.
    #[inline]
    pub fn edge_sign(&self, g: &WeightedGraph, e: usize) -> i8 {
        let ed = g.edge(e);
        self.s[ed.u] * self.s[ed.v]
    }

    pub fn magnetization(&self, vertices: impl Iterator<Item = usize>) -> f64 {
        let mut n = 0usize;
        let mut sum = 0i64;
        for v in vertices {
            n += 1;
            sum += self.s[v] as i64;
        }
        if n == 0 {
            0.0
        } else {
            sum as f64 / n as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PercConfig {
    pub open: Vec<bool>,
}

impl PercConfig {
    pub fn closed(m: usize) -> Self {
        PercConfig { open: vec![false; m] }
    }

    pub fn open_count(&self) -> usize {
        self.open.iter().filter(|&&b| b).count()
    }

    /// True when `self` is pointwise at most `other`.
    pub fn le(&self, other: &PercConfig) -> bool {
        self.open.iter().zip(&other.open).all(|(&a, &b)| !a || b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CurrentConfig {
    pub n: Vec<u32>,
}

impl CurrentConfig {
    pub fn zero(m: usize) -> Self {
        CurrentConfig { n: vec![0; m] }
    }

    /// Vertices with odd total incident current, in increasing order.
    pub fn sources(&self, g: &WeightedGraph) -> Vec<usize> {
        let mut par = vec![false; g.vertex_count()];
        for (e, &k) in self.n.iter().enumerate() {
            if k % 2 == 1 {
                let ed = g.edge(e);
                par[ed.u] ^= true;
                par[ed.v] ^= true;
            }
        }
        (0..par.len()).filter(|&v| par[v]).collect()
    }

    pub fn parities(&self) -> LoopConfig {
        LoopConfig { bits: self.n.iter().map(|&k| k % 2 == 1).collect() }
    }

    pub fn support(&self) -> PercConfig {
        PercConfig { open: self.n.iter().map(|&k| k > 0).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LoopConfig {
    pub bits: Vec<bool>,
}

impl LoopConfig {
    pub fn empty(m: usize) -> Self {
        LoopConfig { bits: vec![false; m] }
    }

    /// Vertices of odd degree in the subgraph `bits`.
    pub fn boundary(&self, g: &WeightedGraph) -> Vec<usize> {
        let mut par = vec![false; g.vertex_count()];
        for (e, &b) in self.bits.iter().enumerate() {
            if b {
                let ed = g.edge(e);
                par[ed.u] ^= true;
                par[ed.v] ^= true;
            }
        }
        (0..par.len()).filter(|&v| par[v]).collect()
    }

    pub fn is_sourceless(&self, g: &WeightedGraph) -> bool {
        self.boundary(g).is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cycle_graph, path_graph};

    #[test]
    fn params_validate() {
        assert!(ModelParams::new(-0.1, 0.0, 2.0).is_err());
        assert!(ModelParams::new(0.1, -1.0, 2.0).is_err());
        assert!(ModelParams::new(0.1, 0.0, 0.5).is_err());
        assert!(ModelParams::ising(0.3, 0.2).is_ok());
    }

    #[test]
    fn sources_and_boundary() {
        let p = path_graph(3, 1.0).unwrap();
        let n = CurrentConfig { n: vec![1, 2] };
        assert_eq!(n.sources(&p), vec![0, 1]);
        let c = cycle_graph(3, 1.0).unwrap();
        assert!(LoopConfig { bits: vec![true; 3] }.is_sourceless(&c));
        assert_eq!(LoopConfig { bits: vec![true, false, false] }.boundary(&c), vec![0, 1]);
    }
}
