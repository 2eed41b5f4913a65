use crate::error::{invalid, Result};
use crate::graph::FiniteVolume;
use crate::rng::RngStream;
use crate::stats::{batch_means, EstimatorSummary};
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaTable {
    pub p: Vec<f64>,
    pub kappa: Vec<EstimatorSummary>,
    /// Centred second differences at the interior grid points.
    pub second_diff: Vec<(f64, EstimatorSummary)>,
}

impl KappaTable {
    /// `max |D²κ|` over the interior points and the standard error at the maximiser.
    pub fn max_abs_second_diff(&self) -> (f64, f64) {
        self.second_diff
            .iter()
            .map(|(_, s)| (s.mean.abs(), s.se))
            .fold((0.0, 0.0), |acc, x| if x.0 > acc.0 { x } else { acc })
    }
}

/// Bottleneck levels of the origin cluster under the standard monotone coupling:
/// vertex `v` belongs to `K_o(p)` iff its level is below `p`. Invasion from the origin
/// stops once every frontier edge has uniform at least `pmax`. The boundary vertex,
/// if reached, makes every larger `p` infinite.
fn invasion_levels(vol: &FiniteVolume, pmax: f64, seen: &mut [u32], epoch: u32, rng: &mut RngStream) -> (Vec<f64>, f64) {
    let g = &vol.graph;
    let b = g.boundary();
    let mut heap = BinaryHeap::new();
    let push = |heap: &mut BinaryHeap<Reverse<(u64, usize)>>, v: usize, rng: &mut RngStream, seen: &[u32]| {
        for &(_, y) in g.incident(v) {
            if seen[y] != epoch {
                heap.push(Reverse((rng.uniform().to_bits(), y)));
            }
        }
    };
    seen[vol.origin] = epoch;
    push(&mut heap, vol.origin, rng, seen);
    let mut levels = Vec::new();
    let mut running = 0.0f64;
    let mut boundary_level = f64::INFINITY;
    while let Some(Reverse((bits, y))) = heap.pop() {
        let u = f64::from_bits(bits);
        if u >= pmax {
            break;
        }
        if seen[y] == epoch {
            continue;
        }
        running = running.max(u);
        if Some(y) == b {
            boundary_level = running;
            break;
        }
        seen[y] = epoch;
        levels.push(running);
        push(&mut heap, y, rng, seen);
    }
    (levels, boundary_level)
}

/// `κ(p) = E_p[1/|K_o|]` on a grid of `p`, with infinite clusters counting 0, and its
/// centred second differences. All grid points share one monotone coupling per
/// sample, so differences are estimated per sample.
pub fn free_energy_probe(vol: &FiniteVolume, ps: &[f64], nsamples: usize, rng: &mut RngStream) -> Result<KappaTable> {
    if ps.len() < 3 || ps.windows(2).any(|w| !(w[1] > w[0])) || ps[0] < 0.0 || ps[ps.len() - 1] > 1.0 {
        return invalid("p grid must be increasing in [0, 1] with at least three points");
    }
    let delta = ps[1] - ps[0];
    if ps.windows(2).any(|w| ((w[1] - w[0]) - delta).abs() > 1e-9) {
        return invalid("p grid must be evenly spaced");
    }
    if nsamples < 100 {
        return invalid("need at least 100 samples");
    }
    let pmax = *ps.last().expect("non-empty grid");
    let mut seen = vec![0u32; vol.graph.vertex_count()];
    let mut inv: Vec<Vec<f64>> = vec![Vec::with_capacity(nsamples); ps.len()];
    for s in 0..nsamples {
        let (levels, bl) = invasion_levels(vol, pmax, &mut seen, s as u32 + 1, rng);
        for (i, &p) in ps.iter().enumerate() {
            let x = if bl < p { 0.0 } else { 1.0 / (1 + levels.iter().filter(|&&l| l < p).count()) as f64 };
            inv[i].push(x);
        }
    }
    let seed = rng.seed();
    let kappa: Vec<EstimatorSummary> = inv.iter().map(|xs| batch_means(xs, 50, seed)).collect();
    let second_diff = (1..ps.len() - 1)
        .map(|i| {
            let d: Vec<f64> = (0..nsamples).map(|s| (inv[i + 1][s] - 2.0 * inv[i][s] + inv[i - 1][s]) / (delta * delta)).collect();
            (ps[i], batch_means(&d, 50, seed))
        })
        .collect();
    Ok(KappaTable { p: ps.to_vec(), kappa, second_diff })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rc_probability;
    use crate::graph::{build_tree_ball, cycle_graph, Mode};
    use crate::model::ModelParams;

    #[test]
    fn endpoints() {
        let vol = build_tree_ball(3, 4, Mode::Wired).unwrap();
        let t = free_energy_probe(&vol, &[0.0, 0.5, 1.0], 200, &mut RngStream::new(1, 0)).unwrap();
        assert_eq!(t.kappa[0].mean, 1.0);
        assert_eq!(t.kappa[2].mean, 0.0);
    }

    #[test]
    fn kappa_matches_enumeration_on_small_cycle() {
        // E[1/|K_o|] on C_5 as an exact random-cluster sum at q = 1
        let g = cycle_graph(5, 1.0).unwrap();
        let vol = FiniteVolume::from_graph(g, "cycle", 0).unwrap();
        let ps = [0.2, 0.4, 0.6];
        let t = free_energy_probe(&vol, &ps, 100_000, &mut RngStream::new(2, 0)).unwrap();
        for (i, &p) in ps.iter().enumerate() {
            let beta = -(1.0 - p).ln() / 2.0;
            let mp = ModelParams::new(beta, 0.0, 1.0).unwrap();
            let exact: f64 = (1..=5)
                .map(|s| rc_probability(&vol, &mp, |c| c.label.iter().filter(|&&l| l == c.label[0]).count() == s).unwrap() / s as f64)
                .sum();
            assert!(t.kappa[i].matches(exact, 3.0, 1e-12), "p={p}: {} ± {} vs {exact}", t.kappa[i].mean, t.kappa[i].se);
        }
    }
}
