use super::walk::{rho_graph_estimate, WalkKernel};
use crate::currents::Worm;
use crate::error::{invalid, Result};
use crate::graph::{FiniteVolume, WeightedGraph};
use crate::model::PercConfig;
use crate::rng::RngStream;
use crate::samplers::{SwendsenWang, DEFAULT_BURN_IN};
use crate::stats::{batch_means, weighted_line_fit, EstimatorSummary};
use crate::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

const BATCHES: usize = 50;

/// How the walk position acts on a configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftRule {
    /// Exact translation on a torus: averaged over all base points.
    Translation,
    /// Evaluate the observable at the walked-to vertex of the same configuration,
    /// starting from `origin`. Exact only for transitive volumes.
    WalkedVertex { origin: usize },
}

/// Covariances `Cov(F(φ), F(shift_k φ))` at even lags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovSeries {
    pub k: Vec<usize>,
    pub cov: Vec<f64>,
    pub se: Vec<f64>,
    /// `exp(slope)` of a weighted fit of `ln Cov_k` on `k` over resolved lags; `None`
    /// when fewer than two lags carry covariance above twice their standard error.
    pub rho_hat: Option<f64>,
}

impl CovSeries {
    /// Decay root with unresolved decay counted as 0.
    pub fn root(&self) -> f64 {
        self.rho_hat.unwrap_or(0.0)
    }

    pub fn to_csv_rows(&self, graph: &str, process: &str, f: &str) -> Vec<String> {
        use crate::stats::sig9;
        let rho = self.rho_hat.map(sig9).unwrap_or_default();
        (0..self.k.len())
            .map(|i| format!("{graph},{process},{f},{},{},{},{rho}", self.k[i], sig9(self.cov[i]), sig9(self.se[i])))
            .collect()
    }
}

pub const COV_CSV_HEADER: &str = "graph,process,F,k,cov,se,rho_hat";

/// Estimates walk-shift covariances of a stationary process.
///
/// `draw` returns the field `v ↦ F_v(φ)` of one sample, where `F_v` is the local
/// observable translated to `v`. For each sample the walk is averaged out exactly by
/// applying `P^k` to the field.
pub fn process_cov_decay<D>(g: &WeightedGraph, rule: ShiftRule, lags: &[usize], nsamples: usize, mut draw: D, rng: &mut RngStream) -> Result<CovSeries>
where
    D: FnMut(&mut RngStream) -> Result<Vec<f64>>,
{
    if lags.is_empty() || lags.iter().any(|k| k % 2 == 1) || lags.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("lags must be even and strictly increasing");
    }
    if nsamples < 2 * BATCHES {
        return invalid(format!("need at least {} samples", 2 * BATCHES));
    }
    match rule {
        ShiftRule::Translation if g.labels().is_none() => return invalid("translation rule needs a torus"),
        ShiftRule::WalkedVertex { origin } if origin >= g.vertex_count() => return invalid("origin is not a vertex"),
        _ => {}
    }
    let kernel = WalkKernel::new(g)?;
    let n = g.vertex_count();
    let kmax = *lags.last().expect("non-empty lags");
    // per lag: samples of (x, a, b) with x = ⟨f P^k f⟩, a = ⟨f⟩, b = ⟨P^k f⟩
    let mut xs = vec![Vec::with_capacity(nsamples); lags.len()];
    let mut as_ = Vec::with_capacity(nsamples);
    let mut bs = vec![Vec::with_capacity(nsamples); lags.len()];
    let mut g_k = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    for _ in 0..nsamples {
        let f = draw(rng)?;
        if f.len() != n {
            return invalid("observable field has the wrong length");
        }
        let avg = |h: &[f64]| -> f64 {
            match rule {
                ShiftRule::Translation => h.iter().sum::<f64>() / n as f64,
                ShiftRule::WalkedVertex { origin } => h[origin],
            }
        };
        let a = avg(&f);
        as_.push(a);
        g_k.copy_from_slice(&f);
        let mut li = 0;
        for step in 0..=kmax {
            if step > 0 {
                kernel.apply(&g_k, &mut tmp);
                std::mem::swap(&mut g_k, &mut tmp);
            }
            if li < lags.len() && lags[li] == step {
                let x = match rule {
                    ShiftRule::Translation => f.iter().zip(&g_k).map(|(p, q)| p * q).sum::<f64>() / n as f64,
                    ShiftRule::WalkedVertex { origin } => f[origin] * g_k[origin],
                };
                xs[li].push(x);
                bs[li].push(avg(&g_k));
                li += 1;
            }
        }
    }
    let seed = rng.seed();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let abar = mean(&as_);
    let (mut cov, mut se) = (Vec::new(), Vec::new());
    for li in 0..lags.len() {
        let bbar = mean(&bs[li]);
        let c = mean(&xs[li]) - abar * bbar;
        // delta-method linearisation of x̄ − āb̄
        let z: Vec<f64> = (0..nsamples).map(|s| xs[li][s] - bbar * as_[s] - abar * bs[li][s]).collect();
        cov.push(c);
        se.push(batch_means(&z, BATCHES, seed).se);
    }
    let rho_hat = decay_root(lags, &cov, &se);
    Ok(CovSeries { k: lags.to_vec(), cov, se, rho_hat })
}

fn decay_root(lags: &[usize], cov: &[f64], se: &[f64]) -> Option<f64> {
    let (mut x, mut y, mut w) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..lags.len() {
        if cov[i] > 2.0 * se[i] && cov[i] > 0.0 {
            x.push(lags[i] as f64);
            y.push(cov[i].ln());
            let rel = (se[i] / cov[i]).max(1e-12);
            w.push(1.0 / (rel * rel));
        }
    }
    weighted_line_fit(&x, &y, &w).map(|fit| fit.slope.exp())
}

/// Cluster size at every vertex.
pub fn cluster_sizes(g: &WeightedGraph, w: &PercConfig) -> Vec<usize> {
    let mut uf = UnionFind::new(g.vertex_count());
    for (e, ed) in g.edges().iter().enumerate() {
        if w.open[e] {
            uf.union(ed.u, ed.v);
        }
    }
    (0..g.vertex_count()).map(|v| uf.set_size(v)).collect()
}

/// For each vertex `v`, the edge from `v` to its `+1` neighbour in direction `dir` of a torus.
pub fn torus_edge_at(g: &WeightedGraph, dir: usize) -> Result<Vec<usize>> {
    let Some(lab) = g.labels() else {
        return invalid("graph has no translation labels");
    };
    if dir >= lab.periods.len() {
        return invalid("direction out of range");
    }
    let mut shift = vec![0i64; lab.periods.len()];
    shift[dir] = 1;
    (0..g.vertex_count())
        .map(|v| {
            let y = lab.translate(v, &shift);
            g.incident(v)
                .iter()
                .find(|&&(e, o)| o == y && g.edge(e).u == v)
                .map(|&(e, _)| e)
                .ok_or_else(|| crate::error::Error::Invalid(format!("no +{dir} edge at {v}")))
        })
        .collect()
}

/// Outcome of a one-sided comparison `estimate ≤ bound + 3 SE`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub estimate: EstimatorSummary,
    pub bound: f64,
}

impl BoundCheck {
    pub fn passes(&self) -> bool {
        self.estimate.below(self.bound, 3.0)
    }
}

/// `P(X_0, X_n` in the same finite cluster`)` on a wired volume against `rho^n`.
///
/// The walk starts at the origin and is killed at the boundary; given a
/// configuration the walk is averaged out exactly.
pub fn schramm_check<D>(vol: &FiniteVolume, n: usize, rho: f64, nsamples: usize, mut draw: D, rng: &mut RngStream) -> Result<BoundCheck>
where
    D: FnMut(&mut RngStream) -> Result<PercConfig>,
{
    let g = &vol.graph;
    let Some(b) = g.boundary() else {
        return invalid("schramm check needs a wired volume");
    };
    if nsamples < 2 * BATCHES {
        return invalid(format!("need at least {} samples", 2 * BATCHES));
    }
    let kernel = WalkKernel::new(g)?;
    let mut mu = vec![0.0; g.vertex_count()];
    let mut tmp = mu.clone();
    mu[vol.origin] = 1.0;
    for _ in 0..n {
        kernel.push(&mu, &mut tmp);
        std::mem::swap(&mut mu, &mut tmp);
    }
    let mut xs = Vec::with_capacity(nsamples);
    let mut uf = UnionFind::new(g.vertex_count());
    for _ in 0..nsamples {
        let w = draw(rng)?;
        uf.reset();
        for (e, ed) in g.edges().iter().enumerate() {
            if w.open[e] {
                uf.union(ed.u, ed.v);
            }
        }
        let x = if uf.connected(vol.origin, b) {
            0.0
        } else {
            let r = uf.find(vol.origin);
            (0..g.vertex_count()).filter(|&v| mu[v] > 0.0 && uf.find(v) == r).map(|v| mu[v]).sum()
        };
        xs.push(x);
    }
    Ok(BoundCheck { estimate: batch_means(&xs, BATCHES, rng.seed()), bound: rho.powi(n as i32) })
}

/// Covariance series of `1(m ≤ |K_v|)` under FK `q = 2` on a torus together with the
/// lag-wise bound `ρ̂^k`. Every torus cluster is finite.
pub struct ClusterCovariance {
    pub series: CovSeries,
    pub rho: f64,
}

impl ClusterCovariance {
    pub fn bounds(&self) -> Vec<f64> {
        self.series.k.iter().map(|&k| self.rho.powi(k as i32)).collect()
    }

    pub fn passes(&self) -> bool {
        let b = self.bounds();
        (0..b.len()).all(|i| self.series.cov[i].abs() <= b[i] + 3.0 * self.series.se[i])
    }
}

pub fn cluster_covariance_check(
    torus: &WeightedGraph,
    beta: f64,
    m: usize,
    lags: &[usize],
    rho_steps: usize,
    nsamples: usize,
    rng: &mut RngStream,
) -> Result<ClusterCovariance> {
    let rho = rho_graph_estimate(torus, 0, rho_steps)?.rho_hat;
    let mut sw = SwendsenWang::new(torus, None, beta);
    for _ in 0..DEFAULT_BURN_IN {
        sw.step(rng);
    }
    let series = process_cov_decay(
        torus,
        ShiftRule::Translation,
        lags,
        nsamples,
        |r| {
            sw.step(r);
            Ok(cluster_sizes(torus, &sw.bonds).into_iter().map(|s| f64::from(u8::from(s >= m))).collect())
        },
        rng,
    )?;
    Ok(ClusterCovariance { series, rho })
}

/// Covariance decay roots of the loop O(1) bit and the Ising gradient `σ_uσ_v` on
/// the `+e_1` edge, on a torus at zero field, plus the graph estimate `ρ̂`.
#[derive(Clone, Debug)]
pub struct LoopGradientComparison {
    pub beta: f64,
    pub loops: CovSeries,
    pub gradient: CovSeries,
    pub rho: f64,
}

impl LoopGradientComparison {
    pub fn passes(&self, tol: f64) -> bool {
        self.loops.root() <= self.rho.max(self.gradient.root()) + tol
    }
}

pub fn loop_gradient_comparison(
    torus: &WeightedGraph,
    beta: f64,
    lags: &[usize],
    rho_steps: usize,
    nsamples: usize,
    rng: &mut RngStream,
) -> Result<LoopGradientComparison> {
    let at = torus_edge_at(torus, 0)?;
    let rho = rho_graph_estimate(torus, 0, rho_steps)?.rho_hat;
    let mut worm_rng = rng.substream(1);
    let mut worm = Worm::new(torus, beta);
    let sweep = 4 * torus.edge_count();
    worm.run_closed(DEFAULT_BURN_IN * sweep / 10, &mut worm_rng);
    let loops = process_cov_decay(
        torus,
        ShiftRule::Translation,
        lags,
        nsamples,
        |r| {
            worm.run_closed(sweep, r);
            let bits = worm.bits();
            Ok(at.iter().map(|&e| f64::from(u8::from(bits[e]))).collect())
        },
        &mut worm_rng,
    )?;
    let mut sw_rng = rng.substream(2);
    let mut sw = SwendsenWang::new(torus, None, beta);
    for _ in 0..DEFAULT_BURN_IN {
        sw.step(&mut sw_rng);
    }
    let gradient = process_cov_decay(
        torus,
        ShiftRule::Translation,
        lags,
        nsamples,
        |r| {
            sw.step(r);
            Ok(at.iter().map(|&e| f64::from(sw.spins.edge_sign(torus, e))).collect())
        },
        &mut sw_rng,
    )?;
    Ok(LoopGradientComparison { beta, loops, gradient, rho })
}
