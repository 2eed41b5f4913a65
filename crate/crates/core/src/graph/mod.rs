//! Finite weighted graphs, finite volumes and derived graphs.
//!
//! Edges carry ids equal to their position in the edge list. That order is the
//! construction order of the builder and serves as the canonical edge enumeration.

mod builders;
mod derived;
mod field;
mod volume;

pub use builders::{build_cayley_patch, build_torus, build_tree_ball, CyclicFactor};
pub use derived::{add_ghost_vertex, double_edges, mass_transport_residual, strip_ghost, DoubledEdges};
pub use builders::{build_line_window, cycle_graph, path_graph};
pub use field::{Bc, FieldGraph};
pub use volume::{FiniteVolume, Mode, Parent};

use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub j: f64,
}

impl Edge {
    pub fn new(u: usize, v: usize, j: f64) -> Self {
        Edge { u, v, j }
    }

    /// The endpoint opposite to `x`.
    #[inline]
    pub fn other(&self, x: usize) -> usize {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

/// Translation structure of a torus: per-vertex coordinates modulo `periods`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftLabels {
    pub periods: Vec<i64>,
    pub coords: Vec<Vec<i64>>,
}

impl ShiftLabels {
    /// Vertex reached from `v` by adding `shift` coordinate-wise.
    pub fn translate(&self, v: usize, shift: &[i64]) -> usize {
        let mut idx = 0usize;
        for (d, &p) in self.periods.iter().enumerate() {
            let c = (self.coords[v][d] + shift[d]).rem_euclid(p);
            idx = idx * p as usize + c as usize;
        }
        idx
    }

    /// Coordinate difference `v - u` reduced modulo the periods.
    pub fn difference(&self, u: usize, v: usize) -> Vec<i64> {
        self.periods
            .iter()
            .enumerate()
            .map(|(d, &p)| (self.coords[v][d] - self.coords[u][d]).rem_euclid(p))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    boundary: Option<usize>,
    labels: Option<ShiftLabels>,
    adj: Vec<Vec<(usize, usize)>>,
}

impl PartialEq for WeightedGraph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.edges == other.edges
            && self.boundary == other.boundary
            && self.labels == other.labels
    }
}

impl WeightedGraph {
    pub fn new(n: usize, edges: Vec<Edge>, boundary: Option<usize>) -> Result<Self> {
        if let Some(b) = boundary {
            if b >= n {
                return invalid(format!("boundary vertex {b} out of range (V = {n})"));
            }
        }
        let mut adj = vec![Vec::new(); n];
        for (id, e) in edges.iter().enumerate() {
            if e.u >= n || e.v >= n {
                return invalid(format!("edge {id} has an endpoint outside 0..{n}"));
            }
            if e.u == e.v {
                return invalid(format!("edge {id} is a self-loop at vertex {}", e.u));
            }
            if !(e.j > 0.0 && e.j.is_finite()) {
                return invalid(format!("edge {id} has non-positive or non-finite weight {}", e.j));
            }
            adj[e.u].push((id, e.v));
            adj[e.v].push((id, e.u));
        }
        Ok(WeightedGraph { n, edges, boundary, labels: None, adj })
    }

    pub fn with_labels(mut self, labels: ShiftLabels) -> Result<Self> {
        if labels.coords.len() != self.n || labels.coords.iter().any(|c| c.len() != labels.periods.len()) {
            return invalid("shift labels do not match the vertex set");
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn boundary(&self) -> Option<usize> {
        self.boundary
    }

    pub fn labels(&self) -> Option<&ShiftLabels> {
        self.labels.as_ref()
    }

    /// Incident `(edge id, neighbour)` pairs of `v`, in edge-id order.
    pub fn incident(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn weighted_degree(&self, v: usize) -> f64 {
        self.adj[v].iter().map(|&(e, _)| self.edges[e].j).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.j).sum()
    }

    /// Same vertex set, keeping the edges selected by `keep` (ids are renumbered
    /// in order); the second value maps new ids to old ids.
    pub fn edge_subgraph(&self, keep: &[bool]) -> (WeightedGraph, Vec<usize>) {
        let ids: Vec<usize> = (0..self.edges.len()).filter(|&e| keep[e]).collect();
        let edges = ids.iter().map(|&e| self.edges[e]).collect();
        let g = WeightedGraph::new(self.n, edges, self.boundary).expect("subgraph of a valid graph");
        (g, ids)
    }

    pub fn to_json(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("{{\"vertices\":{},\"edges\":[", self.n));
        for (i, e) in self.edges.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(&format!("[{},{},{:.16e}]", e.u, e.v, e.j));
        }
        s.push_str("],\"boundary\":");
        match self.boundary {
            Some(b) => s.push_str(&b.to_string()),
            None => s.push_str("null"),
        }
        if let Some(l) = &self.labels {
            s.push_str(",\"labels\":");
            s.push_str(&serde_json::to_string(l).expect("labels serialize"));
        }
        s.push('}');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            vertices: usize,
            edges: Vec<(usize, usize, f64)>,
            boundary: Option<usize>,
            #[serde(default)]
            labels: Option<ShiftLabels>,
        }
        let raw: Raw = serde_json::from_str(text)?;
        let edges = raw.edges.into_iter().map(|(u, v, j)| Edge::new(u, v, j)).collect();
        let g = WeightedGraph::new(raw.vertices, edges, raw.boundary)?;
        match raw.labels {
            Some(l) => g.with_labels(l),
            None => Ok(g),
        }
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash_hex(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    /// Breadth-first distances from `src` (`usize::MAX` if unreachable).
    pub fn distances(&self, src: usize) -> Vec<usize> {
        let mut d = vec![usize::MAX; self.n];
        let mut queue = std::collections::VecDeque::new();
        d[src] = 0;
        queue.push_back(src);
        while let Some(x) = queue.pop_front() {
            for &(_, y) in &self.adj[x] {
                if d[y] == usize::MAX {
                    d[y] = d[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        d
    }
}
