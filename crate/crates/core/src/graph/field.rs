use super::{Edge, WeightedGraph};
use crate::error::{invalid, Result};

/// Spin boundary condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bc {
    /// No pinned vertex; a field adds a separate ghost.
    Free,
    /// The boundary vertex is pinned to `+1`; a field attaches to it.
    Plus,
}

/// The working graph on which every representation is evaluated.
///
/// Each element of `E ∪ V` of the base graph becomes an edge of `graph`: base edges
/// keep their ids, and vertex `v` gets a field edge of weight `h` to the root. The
/// root is the wired boundary (plus) or a fresh ghost (free with `h > 0`); it is the
/// pinned `+1` spin, the open hub of the random-cluster model, and an ordinary
/// vertex of the current and loop models. Element ids are `e` for edges and
/// `E + v` for vertices.
#[derive(Clone, Debug)]
pub struct FieldGraph {
    pub graph: WeightedGraph,
    pub root: Option<usize>,
    pub h: f64,
    base_edges: usize,
    base_vertices: usize,
    vertex_edge: Vec<Option<usize>>,
    element_of: Vec<usize>,
}

impl FieldGraph {
    pub fn new(g: &WeightedGraph, h: f64, bc: Bc) -> Result<Self> {
        if !(h >= 0.0 && h.is_finite()) {
            return invalid("field must be finite and non-negative");
        }
        let n = g.vertex_count();
        let m = g.edge_count();
        let mut edges = g.edges().to_vec();
        let mut element_of: Vec<usize> = (0..m).collect();
        let mut vertex_edge = vec![None; n];
        let (root, total_vertices) = match bc {
            Bc::Plus => match g.boundary() {
                Some(b) => (Some(b), n),
                None => return invalid("plus boundary condition needs a boundary vertex"),
            },
            Bc::Free if h > 0.0 => (Some(n), n + 1),
            Bc::Free => (None, n),
        };
        if h > 0.0 {
            let r = root.expect("field needs a root");
            for v in 0..n {
                if v == r {
                    continue;
                }
                vertex_edge[v] = Some(edges.len());
                element_of.push(m + v);
                edges.push(Edge::new(v, r, h));
            }
        }
        let graph = WeightedGraph::new(total_vertices, edges, root)?;
        Ok(FieldGraph { graph, root, h, base_edges: m, base_vertices: n, vertex_edge, element_of })
    }

    /// Plus if the graph has a boundary vertex, free otherwise.
    pub fn natural(g: &WeightedGraph, h: f64) -> Result<Self> {
        let bc = if g.boundary().is_some() { Bc::Plus } else { Bc::Free };
        FieldGraph::new(g, h, bc)
    }

    pub fn base_edges(&self) -> usize {
        self.base_edges
    }

    pub fn base_vertices(&self) -> usize {
        self.base_vertices
    }

    /// Number of elements `|E| + |V|` of the base graph.
    pub fn element_count(&self) -> usize {
        self.base_edges + self.base_vertices
    }

    pub fn vertex_element(&self, v: usize) -> usize {
        self.base_edges + v
    }

    /// Working-graph edge carrying element `x`, if present.
    pub fn element_edge(&self, x: usize) -> Option<usize> {
        if x < self.base_edges {
            Some(x)
        } else {
            self.vertex_edge.get(x - self.base_edges).copied().flatten()
        }
    }

    /// Element carried by working-graph edge `we`.
    pub fn edge_element(&self, we: usize) -> usize {
        self.element_of[we]
    }

    /// Coupling `J_x` of element `x`: the edge weight or `h`; zero if absent.
    pub fn element_weight(&self, x: usize) -> f64 {
        self.element_edge(x).map_or(0.0, |we| self.graph.edge(we).j)
    }

    /// Endpoints in the working graph (`(v, root)` for a vertex element).
    pub fn element_endpoints(&self, x: usize) -> Option<(usize, usize)> {
        if x < self.base_edges {
            let e = self.graph.edge(x);
            Some((e.u, e.v))
        } else {
            let v = x - self.base_edges;
            if v >= self.base_vertices {
                return None;
            }
            self.root.filter(|&r| r != v).map(|r| (v, r))
        }
    }

    /// Index of the field edge of `v`, if `v` carries one.
    pub fn field_edge(&self, v: usize) -> Option<usize> {
        self.vertex_edge[v]
    }
}
