use crate::currents::{QParams, QSampler};
use crate::error::{invalid, Result};
use crate::graph::{FiniteVolume, Mode};
use crate::rng::RngStream;
use crate::samplers::{FkHeatBath, SwendsenWang};
use crate::stats::{batch_means, weighted_line_fit, EstimatorSummary, LineFit};
use crate::unionfind::UnionFind;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Percolation models with a cluster of the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TailModel {
    Bernoulli { p: f64 },
    /// Random-cluster model with the boundary (if any) as the wired hub.
    Fk { q: f64, beta: f64 },
    /// 1-open layer of the mismatched double current on a wired volume.
    QOneOpen { params: QParams },
}

/// `P(n ≤ |K_o| < ∞)` on the dyadic grid `n = 1, 2, 4, …` with a log-log slope fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailTable {
    pub n: Vec<usize>,
    pub tail: Vec<EstimatorSummary>,
    /// Fit window `[lo, hi]` in `n`.
    pub window: (usize, usize),
    pub fit: Option<LineFit>,
}

impl TailTable {
    /// `slope ± 1.96 SE`.
    pub fn slope_ci(&self) -> Option<(f64, f64, f64)> {
        self.fit.map(|f| (f.slope, f.slope - 1.96 * f.slope_se, f.slope + 1.96 * f.slope_se))
    }
}

/// Dyadic sizes up to `nmax`.
pub fn dyadic(nmax: usize) -> Vec<usize> {
    std::iter::successors(Some(1usize), |&n| n.checked_mul(2)).take_while(|&n| n <= nmax).collect()
}

/// Fits `ln tail` on `ln n` over `n ∈ [lo, hi]` with inverse-variance weights.
pub fn fit_tail(n: &[usize], tail: &[EstimatorSummary], lo: usize, hi: usize) -> Option<LineFit> {
    let (mut x, mut y, mut w) = (Vec::new(), Vec::new(), Vec::new());
    for (i, &k) in n.iter().enumerate() {
        let t = tail[i];
        if k >= lo && k <= hi && t.mean > 0.0 && t.se > 0.0 {
            x.push((k as f64).ln());
            y.push(t.mean.ln());
            let rel = t.se / t.mean;
            w.push(1.0 / (rel * rel));
        }
    }
    weighted_line_fit(&x, &y, &w)
}

/// Size of the origin cluster, `None` when it reaches the boundary. Bernoulli edges
/// are drawn lazily; on a free volume exploration may stop once `cap` is reached.
fn lazy_bernoulli(vol: &FiniteVolume, p: f64, cap: usize, seen: &mut [u32], epoch: u32, rng: &mut RngStream) -> Option<usize> {
    let g = &vol.graph;
    let b = g.boundary();
    let mut queue = VecDeque::new();
    seen[vol.origin] = epoch;
    queue.push_back(vol.origin);
    let mut size = 1;
    while let Some(v) = queue.pop_front() {
        for &(_, y) in g.incident(v) {
            // each edge is examined once: from the endpoint reached first
            if seen[y] == epoch {
                continue;
            }
            if rng.uniform() < p {
                if Some(y) == b {
                    return None;
                }
                seen[y] = epoch;
                size += 1;
                if b.is_none() && size >= cap {
                    return Some(size);
                }
                queue.push_back(y);
            }
        }
    }
    Some(size)
}

/// Tail probabilities of the origin cluster with finite meaning "avoids the boundary".
///
/// The fit window is `[8, fit_max]`; below `n = 8` no claim is made.
pub fn cluster_tail(vol: &FiniteVolume, model: TailModel, nmax: usize, fit_max: usize, nsamples: usize, rng: &mut RngStream) -> Result<TailTable> {
    if nmax < 1 || nsamples < 100 {
        return invalid("cluster tail needs nmax >= 1 and at least 100 samples");
    }
    let n = dyadic(nmax);
    let mut sizes: Vec<Option<usize>> = Vec::with_capacity(nsamples);
    match model {
        TailModel::Bernoulli { p } => {
            if !(0.0..=1.0).contains(&p) {
                return invalid("p must lie in [0, 1]");
            }
            check_simple(vol)?;
            let mut seen = vec![0u32; vol.graph.vertex_count()];
            for s in 0..nsamples {
                sizes.push(lazy_bernoulli(vol, p, nmax, &mut seen, s as u32 + 1, rng));
            }
        }
        TailModel::Fk { q, beta } => {
            let g = &vol.graph;
            let mut uf = UnionFind::new(g.vertex_count());
            let record = |open: &[bool], uf: &mut UnionFind| {
                uf.reset();
                for (e, ed) in g.edges().iter().enumerate() {
                    if open[e] {
                        uf.union(ed.u, ed.v);
                    }
                }
                match g.boundary() {
                    Some(b) if uf.connected(vol.origin, b) => None,
                    _ => Some(uf.set_size(vol.origin)),
                }
            };
            if q == 2.0 {
                let mut sw = SwendsenWang::new(g, g.boundary(), beta);
                for _ in 0..super::magnet::burn_in(nsamples) {
                    sw.step(rng);
                }
                for _ in 0..nsamples {
                    sw.step(rng);
                    sizes.push(record(&sw.bonds.open, &mut uf));
                }
            } else {
                let k: Vec<f64> = g.edges().iter().map(|e| beta * e.j).collect();
                let mut hb = FkHeatBath::new(g, q, &k)?;
                for _ in 0..super::magnet::burn_in(nsamples) {
                    hb.sweep(rng);
                }
                for _ in 0..nsamples {
                    hb.sweep(rng);
                    sizes.push(record(&hb.state.open, &mut uf));
                }
            }
        }
        TailModel::QOneOpen { params } => {
            if vol.mode != Mode::Wired {
                return invalid("the double-current layer needs a wired volume");
            }
            let s = QSampler::new(vol, params)?;
            let w = s.graph();
            let root = s.fg.root.expect("wired volume has a root");
            let mut uf = UnionFind::new(w.vertex_count());
            for _ in 0..nsamples {
                let qp = s.sample(rng);
                uf.reset();
                for (e, ed) in w.edges().iter().enumerate() {
                    if qp.one_open(e) {
                        uf.union(ed.u, ed.v);
                    }
                }
                sizes.push(if uf.connected(vol.origin, root) { None } else { Some(uf.set_size(vol.origin)) });
            }
        }
    }
    let seed = rng.seed();
    let tail: Vec<EstimatorSummary> = n
        .iter()
        .map(|&k| {
            let xs: Vec<f64> = sizes.iter().map(|s| f64::from(u8::from(matches!(s, Some(m) if *m >= k)))).collect();
            batch_means(&xs, 50, seed)
        })
        .collect();
    let window = (8, fit_max);
    let fit = fit_tail(&n, &tail, window.0, window.1);
    Ok(TailTable { n, tail, window, fit })
}

fn check_simple(vol: &FiniteVolume) -> Result<()> {
    // parallel interior edges would be sampled once by the lazy explorer
    let g = &vol.graph;
    let b = g.boundary();
    for v in 0..g.vertex_count() {
        if Some(v) == b {
            continue;
        }
        let mut nb: Vec<usize> = g.incident(v).iter().map(|&(_, y)| y).filter(|&y| Some(y) != b).collect();
        let len = nb.len();
        nb.sort_unstable();
        nb.dedup();
        if nb.len() != len {
            return invalid("lazy exploration needs simple interior edges");
        }
    }
    Ok(())
}

/// Exact law of `|K_o|` restricted to finite clusters for Bernoulli(p) on the
/// `k`-regular tree ball of radius `r`, by the generating-function recursion.
///
/// Returns `(P(|K_o| = m, finite) for m < nmax, P(finite))`.
pub fn tree_tail_oracle(k: usize, r: usize, p: f64, mode: Mode, nmax: usize) -> Result<(Vec<f64>, f64)> {
    if k < 3 || r == 0 || nmax < 2 {
        return invalid("oracle needs k >= 3, r >= 1, nmax >= 2");
    }
    let mul = |a: &[f64], b: &[f64]| -> Vec<f64> {
        let mut c = vec![0.0; nmax];
        for (i, &x) in a.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate().take(nmax - i) {
                c[i + j] += x * y;
            }
        }
        c
    };
    let pow = |base: &[f64], e: usize| -> Vec<f64> {
        let mut acc = vec![0.0; nmax];
        acc[0] = 1.0;
        for _ in 0..e {
            acc = mul(&acc, base);
        }
        acc
    };
    // subtree of a depth-d vertex: x (1 - p + p G_{d+1})^{k-1}
    let leaf_weight = match mode {
        Mode::Free => 1.0,
        Mode::Wired => (1.0 - p).powi((k - 1) as i32),
    };
    let mut g = vec![0.0; nmax];
    g[1] = leaf_weight;
    let mut fin = leaf_weight;
    for _ in 1..r {
        let mut base: Vec<f64> = g.iter().map(|x| p * x).collect();
        base[0] += 1.0 - p;
        let pw = pow(&base, k - 1);
        g = vec![0.0; nmax];
        g[1..].copy_from_slice(&pw[..nmax - 1]);
        fin = (1.0 - p + p * fin).powi((k - 1) as i32);
    }
    let mut base: Vec<f64> = g.iter().map(|x| p * x).collect();
    base[0] += 1.0 - p;
    let pw = pow(&base, k);
    let mut law = vec![0.0; nmax];
    law[1..].copy_from_slice(&pw[..nmax - 1]);
    Ok((law, (1.0 - p + p * fin).powi(k as i32)))
}

/// `P(n ≤ |K_o| < ∞)` from the oracle law.
pub fn oracle_tail(law: &[f64], finite: f64, n: usize) -> f64 {
    finite - law.iter().take(n).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_tree_ball;

    #[test]
    fn oracle_edge_cases() {
        let (law, fin) = tree_tail_oracle(3, 4, 0.0, Mode::Wired, 10).unwrap();
        assert!((law[1] - 1.0).abs() < 1e-15 && (fin - 1.0).abs() < 1e-15);
        let (law, fin) = tree_tail_oracle(3, 3, 1.0, Mode::Free, 30).unwrap();
        assert!((law[22] - 1.0).abs() < 1e-15 && (fin - 1.0).abs() < 1e-12);
        let (_, fin) = tree_tail_oracle(3, 3, 1.0, Mode::Wired, 30).unwrap();
        assert!(fin.abs() < 1e-15);
    }

    #[test]
    fn lazy_bernoulli_matches_oracle() {
        for mode in [Mode::Free, Mode::Wired] {
            let vol = build_tree_ball(3, 4, mode).unwrap();
            let mut rng = RngStream::new(9, 0);
            let t = cluster_tail(&vol, TailModel::Bernoulli { p: 0.5 }, 32, 32, 100_000, &mut rng).unwrap();
            let (law, fin) = tree_tail_oracle(3, 4, 0.5, mode, 64).unwrap();
            for (i, &n) in t.n.iter().enumerate() {
                let exact = oracle_tail(&law, fin, n);
                assert!(t.tail[i].matches(exact, 3.0, 1e-12), "{mode:?} n={n}: {} ± {} vs {exact}", t.tail[i].mean, t.tail[i].se);
            }
        }
    }

    #[test]
    fn fk_q1_agrees_with_bernoulli_oracle() {
        let vol = build_tree_ball(3, 3, Mode::Wired).unwrap();
        let beta = 0.5f64;
        let p = 1.0 - (-2.0 * beta).exp();
        let mut rng = RngStream::new(10, 0);
        let t = cluster_tail(&vol, TailModel::Fk { q: 1.0, beta }, 16, 16, 20_000, &mut rng).unwrap();
        let (law, fin) = tree_tail_oracle(3, 3, p, Mode::Wired, 32).unwrap();
        for (i, &n) in t.n.iter().enumerate() {
            let exact = oracle_tail(&law, fin, n);
            assert!(t.tail[i].matches(exact, 3.0, 5.0 / 20_000.0), "n={n}: {} ± {} vs {exact}", t.tail[i].mean, t.tail[i].se);
        }
    }
}
