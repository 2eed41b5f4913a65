//! The standard small-graph corpus and the batch of identity checks run on it.

use super::identities::{
    double_current_connection, es_cylinder, first_random_current, fk_gradient, gradient_identity, loop_ising,
    phisigma, switching, Check,
};
use crate::error::Result;
use crate::graph::{
    add_ghost_vertex, build_line_window, build_tree_ball, cycle_graph, double_edges, path_graph, Edge, FieldGraph, Mode,
    WeightedGraph,
};

/// Named graphs with at most 12 edges.
pub fn corpus() -> Result<Vec<(String, WeightedGraph)>> {
    let mut out = vec![
        ("K2".to_string(), path_graph(2, 1.0)?),
        ("path4-weighted".to_string(), {
            WeightedGraph::new(4, vec![Edge::new(0, 1, 0.5), Edge::new(1, 2, 1.0), Edge::new(2, 3, 1.5)], None)?
        }),
        ("triangle".to_string(), cycle_graph(3, 1.0)?),
        ("square".to_string(), cycle_graph(4, 1.0)?),
        ("tree3-r1-free".to_string(), build_tree_ball(3, 1, Mode::Free)?.graph),
        ("tree3-r1-wired".to_string(), build_tree_ball(3, 1, Mode::Wired)?.graph),
        ("K2-wired".to_string(), build_line_window(2, Mode::Wired)?.graph),
        ("line3-wired".to_string(), build_line_window(3, Mode::Wired)?.graph),
        ("triangle-doubled".to_string(), double_edges(&cycle_graph(3, 1.0)?, 0.3)?.graph),
        ("K2-wired-doubled".to_string(), double_edges(&build_line_window(2, Mode::Wired)?.graph, 0.5)?.graph),
        ("square-ghost".to_string(), add_ghost_vertex(&cycle_graph(4, 1.0)?, 0.5)?),
    ];
    out.retain(|(_, g)| g.edge_count() <= 12);
    Ok(out)
}

pub const BETA_GRID: [f64; 4] = [0.0, 0.3, 0.7, 1.2];
pub const H_GRID: [f64; 3] = [0.0, 0.2, 0.8];

/// One evaluated identity on one graph and parameter cell.
#[derive(Clone, Debug)]
pub struct SuiteRow {
    pub graph: String,
    pub beta: f64,
    pub h: f64,
    pub check: Check,
}

fn element_sets(m: usize) -> Vec<u64> {
    let mut sets = vec![0u64];
    for i in 0..m {
        sets.push(1 << i);
        for j in i + 1..m {
            sets.push((1 << i) | (1 << j));
        }
    }
    sets.push((1u64 << m) - 1);
    // a few fixed larger subsets
    let mut x: u64 = 0x2545_F491_4F6C_DD1D;
    for _ in 0..8 {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        sets.push(x & ((1u64 << m) - 1));
    }
    sets
}

/// All identity checks of the corpus at one `(β, h)` cell.
pub fn identity_checks(name: &str, g: &WeightedGraph, beta: f64, h: f64, nmax: Option<u32>) -> Result<Vec<SuiteRow>> {
    let fg = FieldGraph::natural(g, h)?;
    let w = &fg.graph;
    let root = fg.root;
    let m = w.edge_count();
    let mut checks = Vec::new();
    let sets = element_sets(m);
    checks.push(loop_ising(w, root, beta, &sets)?);
    checks.push(fk_gradient(w, root, beta, &sets)?);
    checks.push(phisigma(w, root, beta)?);
    let nonroot: Vec<usize> = (0..w.vertex_count()).filter(|&v| Some(v) != root).collect();
    let mut vsets: Vec<Vec<usize>> = vec![vec![]];
    vsets.extend(nonroot.iter().map(|&v| vec![v]));
    vsets.push(nonroot.clone());
    if nonroot.len() >= 2 {
        vsets.push(vec![nonroot[0], nonroot[nonroot.len() - 1]]);
    }
    checks.push(es_cylinder(w, root, beta, &vsets)?);
    let (x, y) = (w.edge(0).u, w.edge(0).v);
    let far = w.vertex_count() - 1;
    let mut pairs = vec![(x, y), (0, far)];
    if let Some(r) = root {
        pairs.push((0, r));
    }
    checks.push(first_random_current(w, root, beta, &pairs, nmax)?);
    // strict subgraph: drop the last edge
    let all = (1u64 << m) - 1;
    let h_mask = all & !(1u64 << (m - 1));
    let other = if far != x && far != y { far } else { nonroot[0] };
    for a in [vec![], vec![x, other]] {
        checks.push(switching(w, h_mask, x, y, &a, beta, nmax, |_| 1.0)?);
        checks.push(switching(w, h_mask, x, y, &a, beta, nmax, |u| 0.5f64.powi(u.count_ones() as i32))?);
        checks.push(switching(w, all, x, y, &a, beta, nmax, |u| f64::from(u8::from(u & 1 == 0)))?);
    }
    checks.push(double_current_connection(w, root, h_mask, x, y, beta, nmax)?);
    checks.push(double_current_connection(w, root, all, x, far, beta, nmax)?);
    Ok(checks
        .into_iter()
        .map(|check| SuiteRow { graph: name.to_string(), beta, h, check })
        .collect())
}

/// Identity checks over the whole corpus and the standard `(β, h)` grid, with
/// current sums truncated at `nmax`.
pub fn identity_suite(nmax: Option<u32>) -> Result<Vec<SuiteRow>> {
    let mut rows = Vec::new();
    for (name, g) in corpus()? {
        for &beta in &BETA_GRID {
            for &h in &H_GRID {
                rows.extend(identity_checks(&name, &g, beta, h, nmax)?);
            }
        }
    }
    Ok(rows)
}

/// Finite gradient identity on the triangle and the square for every edge and every
/// proper subgraph obtained by dropping one other edge.
pub fn gradient_suite(nmax: Option<u32>) -> Result<Vec<SuiteRow>> {
    let mut rows = Vec::new();
    for (name, g) in [("triangle", cycle_graph(3, 1.0)?), ("square", cycle_graph(4, 1.0)?)] {
        let m = g.edge_count();
        let all = (1u64 << m) - 1;
        for &beta in &BETA_GRID {
            for e in 0..m {
                for drop in (0..m).filter(|&d| d != e) {
                    let check = gradient_identity(&g, None, all & !(1 << drop), e, beta, nmax)?;
                    rows.push(SuiteRow { graph: format!("{name}-drop{drop}-e{e}"), beta, h: 0.0, check });
                }
            }
        }
    }
    Ok(rows)
}
