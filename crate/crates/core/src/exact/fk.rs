use super::{guard_bits, BlockSum};
use crate::error::{invalid, Result};
use crate::graph::{FieldGraph, FiniteVolume, WeightedGraph};
use crate::model::ModelParams;
use crate::unionfind::UnionFind;

/// One random-cluster configuration together with its cluster labels.
pub struct ClusterView<'a> {
    pub graph: &'a WeightedGraph,
    pub open: &'a [bool],
    pub label: &'a [u32],
    /// Label of the root cluster (the open hub), if the working graph has a root.
    pub root_label: Option<u32>,
    pub clusters: usize,
}

impl ClusterView<'_> {
    pub fn connected(&self, u: usize, v: usize) -> bool {
        self.label[u] == self.label[v]
    }

    /// Cluster of `v` contains the root (boundary or an open vertex).
    pub fn infinite(&self, v: usize) -> bool {
        Some(self.label[v]) == self.root_label
    }

    /// Number of distinct clusters meeting `a` that do not contain the root.
    pub fn finite_clusters_meeting(&self, a: &[usize]) -> usize {
        let mut seen: Vec<u32> = a.iter().map(|&v| self.label[v]).filter(|&l| Some(l) != self.root_label).collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    /// Clusters not containing the root.
    pub fn finite_cluster_count(&self) -> usize {
        self.clusters - usize::from(self.root_label.is_some())
    }
}

/// Normalized expectations of `k` observables under the random-cluster measure
/// `∝ q^{k(ω)} ∏ (e^{2βJ_e} − 1)^{ω(e)}` on `g`, where `k(ω)` counts clusters not
/// containing `root`.
pub fn rc_sums<F>(g: &WeightedGraph, root: Option<usize>, q: f64, beta: f64, k: usize, mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(&ClusterView, &mut [f64]),
{
    if !(q >= 1.0) {
        return invalid("cluster weight q must be at least 1");
    }
    let m = g.edge_count();
    let n = g.vertex_count();
    guard_bits("random-cluster enumeration", m)?;
    let lq = q.ln();
    let lw: Vec<f64> = g.edges().iter().map(|e| (2.0 * beta * e.j).exp_m1().ln()).collect();
    let nonroot = n - usize::from(root.is_some());
    let shift = nonroot as f64 * lq + lw.iter().map(|&x| x.max(0.0)).sum::<f64>();
    let mut uf = UnionFind::new(n);
    let mut open = vec![false; m];
    let mut z = BlockSum::new();
    let mut sums = vec![BlockSum::new(); k];
    let mut out = vec![0.0; k];
    for mask in 0u64..(1u64 << m) {
        uf.reset();
        let mut lweight = 0.0;
        for e in 0..m {
            open[e] = mask >> e & 1 == 1;
            if open[e] {
                lweight += lw[e];
                let ed = g.edge(e);
                uf.union(ed.u, ed.v);
            }
        }
        if lweight == f64::NEG_INFINITY {
            continue;
        }
        let (label, clusters) = uf.labels();
        let root_label = root.map(|r| label[r]);
        let kc = clusters - usize::from(root.is_some());
        let w = (kc as f64 * lq + lweight - shift).exp();
        let view = ClusterView { graph: g, open: &open, label: &label, root_label, clusters };
        f(&view, &mut out);
        z.add(w);
        for (acc, &x) in sums.iter_mut().zip(&out) {
            acc.add(w * x);
        }
    }
    let z = z.total();
    Ok(sums.iter().map(|s| s.total() / z).collect())
}

/// `φ[F]` on a finite volume: wired volumes use the boundary as the open hub, the
/// field is a set of edges to the root.
pub fn rc_expectation<F>(vol: &FiniteVolume, p: &ModelParams, f: F) -> Result<f64>
where
    F: Fn(&ClusterView) -> f64,
{
    let fg = FieldGraph::natural(&vol.graph, p.h)?;
    Ok(rc_sums(&fg.graph, fg.root, p.q, p.beta, 1, |c, out| out[0] = f(c))?[0])
}

/// Probability of a cylinder event under the random-cluster measure of `vol`.
pub fn rc_probability<F>(vol: &FiniteVolume, p: &ModelParams, event: F) -> Result<f64>
where
    F: Fn(&ClusterView) -> bool,
{
    rc_expectation(vol, p, |c| f64::from(u8::from(event(c))))
}
