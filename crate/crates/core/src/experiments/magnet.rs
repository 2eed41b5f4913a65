use super::table::{Family, ScanRow, ScanTable};
use crate::error::{invalid, Result};
use crate::graph::{Bc, FieldGraph, Mode};
use crate::par::{map_indexed, worker_count};
use crate::rng::RngStream;
use crate::samplers::SwendsenWang;
use crate::stats::{batch_means, weighted_line_fit};
use crate::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

pub const MAGNETIZATION: &str = "m_origin";

pub(crate) fn burn_in(nsamples: usize) -> usize {
    (nsamples / 5).clamp(100, 1000)
}

/// `⟨σ_o⟩` per grid cell and volume size, sampled by Swendsen–Wang on the working graph.
///
/// With a pinned root the estimator is the Edwards–Sokal connection indicator
/// `1(o ↔ root)`; without one it is the spin at the origin.
pub fn magnetization_scan(
    family: Family,
    bc: Bc,
    grid: &[(f64, f64)],
    sizes: &[usize],
    nsamples: usize,
    rng: &RngStream,
) -> Result<ScanTable> {
    if grid.is_empty() || sizes.is_empty() {
        return invalid("magnetization scan needs a non-empty grid and at least one size");
    }
    if grid.iter().any(|&(b, h)| !(b >= 0.0) || !(h >= 0.0) || !h.is_finite()) {
        return invalid("grid needs beta >= 0 and finite h >= 0");
    }
    let mode = match bc {
        Bc::Plus => Mode::Wired,
        Bc::Free => Mode::Free,
    };
    let vols = sizes.iter().map(|&s| family.volume(s, mode)).collect::<Result<Vec<_>>>()?;
    let cells = grid.len() * sizes.len();
    let rows = map_indexed(cells, worker_count(), |c| -> Result<ScanRow> {
        let (gi, si) = (c / sizes.len(), c % sizes.len());
        let (beta, h) = grid[gi];
        let vol = &vols[si];
        let mut r = rng.substream(c as u64);
        let fg = FieldGraph::new(&vol.graph, h, bc)?;
        let mut sw = SwendsenWang::new(&fg.graph, fg.root, beta);
        for _ in 0..burn_in(nsamples) {
            sw.step(&mut r);
        }
        let mut uf = UnionFind::new(fg.graph.vertex_count());
        let mut xs = Vec::with_capacity(nsamples);
        for _ in 0..nsamples {
            sw.step(&mut r);
            let x = match fg.root {
                Some(root) => {
                    uf.reset();
                    for (e, ed) in fg.graph.edges().iter().enumerate() {
                        if sw.bonds.open[e] {
                            uf.union(ed.u, ed.v);
                        }
                    }
                    f64::from(u8::from(uf.connected(vol.origin, root)))
                }
                None => f64::from(sw.spins.s[vol.origin]),
            };
            xs.push(x);
        }
        let s = batch_means(&xs, 50, rng.seed());
        Ok(ScanRow {
            beta,
            h,
            size: sizes[si],
            observable: MAGNETIZATION.into(),
            estimate: s.mean,
            se: s.se,
            nsamples: nsamples as u64,
            seed: rng.seed(),
        })
    });
    Ok(ScanTable::new(rows.into_iter().collect::<Result<Vec<_>>>()?))
}

/// Exact root magnetization of the plus-wired `k`-regular tree ball of radius `r`
/// by the cavity recursion, or of the infinite tree with `r = None`.
pub fn tree_magnetization(k: usize, r: Option<usize>, beta: f64, h: f64) -> Result<f64> {
    if k < 3 {
        return invalid("tree degree must be at least 3");
    }
    let t = beta.tanh();
    let f = |u: f64| (t * u.tanh()).atanh();
    let bh = beta * h;
    let branch = (k - 1) as f64;
    let u1 = match r {
        Some(0) => return Ok((bh + k as f64 * beta).tanh()),
        Some(r) => {
            let mut u = bh + branch * beta;
            for _ in 1..r {
                u = bh + branch * f(u);
            }
            u
        }
        None => {
            // decreasing iteration from the plus boundary converges to the plus fixed point
            let mut u = 1e3;
            for _ in 0..1_000_000 {
                let nu = bh + branch * f(u);
                if (nu - u).abs() < 1e-15 {
                    u = nu;
                    break;
                }
                u = nu;
            }
            u
        }
    };
    Ok((bh + k as f64 * f(u1)).tanh())
}

/// Decay rate of the finite-volume magnetization at one `β`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRate {
    pub beta: f64,
    /// `exp` of the slope of `ln m_r` against `r`.
    pub lambda: f64,
    pub se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnsetFit {
    pub rates: Vec<DecayRate>,
    /// Root of the linear fit of `λ̂(β)` against `β` over the subcritical points.
    pub beta_c: f64,
    pub beta_c_se: f64,
}

/// Locates where the plus-boundary magnetization stops decaying geometrically in
/// the volume size.
///
/// Below the onset `m_r ≈ C λ(β)^r` with `λ < 1`; above it `m_r` converges to a
/// positive limit. Cells with `λ̂ ≤ lambda_max` are taken as subcritical and a
/// weighted line through `(β, λ̂)` is extrapolated to `λ = 1`.
pub fn magnetization_onset(table: &ScanTable, observable: &str, h: f64, lambda_max: f64) -> Result<OnsetFit> {
    let mut betas: Vec<f64> = table.rows.iter().filter(|r| r.observable == observable && r.h == h).map(|r| r.beta).collect();
    betas.sort_by(f64::total_cmp);
    betas.dedup();
    let mut rates = Vec::new();
    for &b in &betas {
        let (mut x, mut y, mut w) = (Vec::new(), Vec::new(), Vec::new());
        for r in table.rows.iter().filter(|r| r.observable == observable && r.h == h && r.beta == b) {
            if r.estimate > 2.0 * r.se && r.estimate > 0.0 {
                let rel = (r.se / r.estimate).max(1e-9);
                x.push(r.size as f64);
                y.push(r.estimate.ln());
                w.push(1.0 / (rel * rel));
            }
        }
        if let Some(fit) = weighted_line_fit(&x, &y, &w) {
            let lambda = fit.slope.exp();
            rates.push(DecayRate { beta: b, lambda, se: lambda * fit.slope_se });
        }
    }
    let sub: Vec<&DecayRate> = rates.iter().filter(|d| d.lambda <= lambda_max && d.se > 0.0).collect();
    if sub.len() < 2 {
        return invalid("fewer than two subcritical cells with resolved decay");
    }
    let x: Vec<f64> = sub.iter().map(|d| d.beta).collect();
    let y: Vec<f64> = sub.iter().map(|d| d.lambda).collect();
    let w: Vec<f64> = sub.iter().map(|d| 1.0 / (d.se * d.se)).collect();
    let Some(fit) = weighted_line_fit(&x, &y, &w) else {
        return invalid("degenerate subcritical beta range");
    };
    if !(fit.slope > 0.0) {
        return invalid("decay rate does not increase with beta");
    }
    let beta_c = (1.0 - fit.intercept) / fit.slope;
    // propagate the slope uncertainty only; the intercept is pinned near the data
    let beta_c_se = (beta_c - x.iter().sum::<f64>() / x.len() as f64).abs() * fit.slope_se / fit.slope;
    Ok(OnsetFit { rates, beta_c, beta_c_se })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recursion_limits() {
        assert_eq!(tree_magnetization(3, Some(5), 0.0, 0.0).unwrap(), 0.0);
        assert!((tree_magnetization(3, None, 0.0, 0.7).unwrap() - 0.0).abs() < 1e-15);
        assert!(tree_magnetization(3, None, 0.5, 0.0).unwrap() < 1e-3);
        assert!(tree_magnetization(3, None, 0.7, 0.0).unwrap() > 0.5);
        let m10 = tree_magnetization(3, Some(10), 0.7, 0.0).unwrap();
        let m20 = tree_magnetization(3, Some(20), 0.7, 0.0).unwrap();
        assert!(m10 >= m20 && m20 >= tree_magnetization(3, None, 0.7, 0.0).unwrap() - 1e-12);
    }

    #[test]
    fn onset_from_exact_rates() {
        let mut rows = Vec::new();
        for i in 0..9 {
            let beta = 0.35 + 0.025 * i as f64;
            for r in [6, 8, 10, 12] {
                let m = tree_magnetization(3, Some(r), beta, 0.0).unwrap();
                rows.push(ScanRow { beta, h: 0.0, size: r, observable: "m".into(), estimate: m, se: 1e-4 * m, nsamples: 1, seed: 0 });
            }
        }
        let fit = magnetization_onset(&ScanTable::new(rows), "m", 0.0, 0.9).unwrap();
        assert!((fit.beta_c - 0.5f64.atanh()).abs() < 0.02, "{}", fit.beta_c);
    }

    #[test]
    fn plus_scan_matches_recursion_on_small_ball() {
        let grid = [(0.4, 0.0), (0.7, 0.0), (0.4, 0.3)];
        let t = magnetization_scan(Family::Tree { k: 3 }, Bc::Plus, &grid, &[3], 20_000, &RngStream::new(5, 0)).unwrap();
        for &(b, h) in &grid {
            let row = t.cell(MAGNETIZATION, b, h, 3).unwrap();
            let exact = tree_magnetization(3, Some(3), b, h).unwrap();
            assert!((row.estimate - exact).abs() <= 3.0 * row.se, "({b},{h}): {} ± {} vs {exact}", row.estimate, row.se);
        }
    }
}
