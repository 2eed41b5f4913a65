use super::{Edge, WeightedGraph};
use crate::error::{invalid, Result};

/// Adds a ghost vertex joined to every vertex by an edge of weight `h`.
///
/// The ghost becomes the boundary vertex of the result and gets id `V`; original
/// edges keep their ids and the ghost edge of vertex `v` has id `E + v`.
pub fn add_ghost_vertex(g: &WeightedGraph, h: f64) -> Result<WeightedGraph> {
    if !(h > 0.0 && h.is_finite()) {
        return invalid("ghost field must be positive");
    }
    if g.boundary().is_some() {
        return invalid(
            "graph already has a boundary/ghost vertex; use FieldGraph to merge a field into a wired boundary",
        );
    }
    let n = g.vertex_count();
    let mut edges = g.edges().to_vec();
    edges.extend((0..n).map(|v| Edge::new(v, n, h)));
    WeightedGraph::new(n + 1, edges, Some(n))
}

/// Removes the ghost created by [`add_ghost_vertex`].
pub fn strip_ghost(g: &WeightedGraph) -> Result<WeightedGraph> {
    let b = match g.boundary() {
        Some(b) if b + 1 == g.vertex_count() => b,
        _ => return invalid("graph has no trailing ghost vertex"),
    };
    let edges = g.edges().iter().copied().filter(|e| e.u != b && e.v != b).collect();
    WeightedGraph::new(b, edges, None)
}

/// Doubled-edge graph with the handle of the first copies.
#[derive(Clone, Debug)]
pub struct DoubledEdges {
    pub graph: WeightedGraph,
    /// `true` on the ids of the first copies `e1`.
    pub first: Vec<bool>,
    pub theta: f64,
}

impl DoubledEdges {
    /// Ids `(e1, e2)` of the two copies of original edge `e`.
    pub fn copies(&self, e: usize) -> (usize, usize) {
        (2 * e, 2 * e + 1)
    }

    pub fn original(&self, d: usize) -> usize {
        d / 2
    }
}

/// Replaces each edge by a pair with weights `(1 - theta) J` and `theta J`.
pub fn double_edges(g: &WeightedGraph, theta: f64) -> Result<DoubledEdges> {
    if !(theta > 0.0 && theta < 1.0) {
        return invalid("theta must lie strictly between 0 and 1");
    }
    let mut edges = Vec::with_capacity(2 * g.edge_count());
    for e in g.edges() {
        // Snap the second copy to the grid of `J - ulp`; then `J - second` is exact and
        // the two weights sum back to exactly `J`.
        let u = e.j - e.j.next_down();
        let second = ((theta * e.j / u).round() * u).clamp(u, e.j - u);
        let first = e.j - second;
        debug_assert_eq!(first + second, e.j);
        edges.push(Edge::new(e.u, e.v, first));
        edges.push(Edge::new(e.u, e.v, second));
    }
    let mut graph = WeightedGraph::new(g.vertex_count(), edges, g.boundary())?;
    if let Some(l) = g.labels() {
        graph = graph.with_labels(l.clone())?;
    }
    let first = (0..graph.edge_count()).map(|d| d % 2 == 0).collect();
    Ok(DoubledEdges { graph, first, theta })
}

/// `|sum_v F(o, v) - sum_v F(v, o)|` with `o = 0`, for shift-invariant `F`.
pub fn mass_transport_residual<F: Fn(usize, usize) -> f64>(g: &WeightedGraph, f: F) -> Result<f64> {
    if g.labels().is_none() {
        return invalid("mass transport needs shift labels");
    }
    let n = g.vertex_count();
    let out: f64 = (0..n).map(|v| f(0, v)).sum();
    let inc: f64 = (0..n).map(|v| f(v, 0)).sum();
    Ok((out - inc).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_torus;

    #[test]
    fn ghost_examples() {
        let k2 = WeightedGraph::new(2, vec![Edge::new(0, 1, 1.0)], None).unwrap();
        let t = add_ghost_vertex(&k2, 1.0).unwrap();
        assert_eq!((t.vertex_count(), t.edge_count()), (3, 3));
        let c4 = build_torus(1, 4, 1.0).unwrap();
        let w = add_ghost_vertex(&c4, 0.5).unwrap();
        assert_eq!(w.edge_count(), 8);
        assert!(add_ghost_vertex(&k2, 0.0).is_err());
        assert!(add_ghost_vertex(&t, 1.0).is_err());
        let back = strip_ghost(&w).unwrap();
        assert_eq!(back.edges(), c4.edges());
    }

    #[test]
    fn doubling_examples() {
        let k2 = WeightedGraph::new(2, vec![Edge::new(0, 1, 1.0)], None).unwrap();
        let d = double_edges(&k2, 0.25).unwrap();
        assert_eq!(d.graph.edge(0).j, 0.75);
        assert_eq!(d.graph.edge(1).j, 0.25);
        assert!(d.first[0] && !d.first[1]);
        assert!(double_edges(&k2, 1.0).is_err());
    }

    #[test]
    fn mass_transport_on_cycle() {
        let c4 = build_torus(1, 4, 1.0).unwrap();
        let l = c4.labels().unwrap().clone();
        let r = mass_transport_residual(&c4, |u, v| f64::from(l.difference(u, v) == vec![1])).unwrap();
        assert_eq!(r, 0.0);
        let r = mass_transport_residual(&c4, |u, v| f64::from(u == v)).unwrap();
        assert_eq!(r, 0.0);
    }
}
