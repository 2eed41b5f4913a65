use super::magnet::{burn_in, magnetization_onset};
use super::table::{Family, ScanRow, ScanTable};
use crate::error::{invalid, Error, Result};
use crate::graph::{build_torus, Mode};
use crate::rng::RngStream;
use crate::samplers::{FkHeatBath, SwendsenWang};
use crate::stats::batch_means;
use crate::unionfind::UnionFind;
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum BetacModel {
    FkFree { q: f64 },
    FkWired { q: f64 },
    Ising,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetacReport {
    pub model: BetacModel,
    pub family: Family,
    pub beta_c: f64,
    /// Evaluated `(β, statistic)` pairs in evaluation order.
    pub history: Vec<(f64, f64)>,
    pub method: String,
}

/// `max |β̂_a − β̂_b|` over the reports.
pub fn betac_spread(reports: &[BetacReport]) -> f64 {
    let (lo, hi) = reports.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), r| (l.min(r.beta_c), h.max(r.beta_c)));
    if reports.is_empty() { 0.0 } else { hi - lo }
}

fn bisect<F: FnMut(f64, usize) -> Result<f64>>(lo: f64, hi: f64, iters: usize, mut stat: F) -> Result<(f64, Vec<(f64, f64)>)> {
    let mut hist = Vec::new();
    let (mut a, mut b) = (lo, hi);
    let fa = stat(a, 0)?;
    let fb = stat(b, 1)?;
    hist.push((a, fa));
    hist.push((b, fb));
    if fa.signum() == fb.signum() {
        return Err(Error::Invalid(format!("bisection does not bracket: f({a}) = {fa}, f({b}) = {fb}")));
    }
    for i in 0..iters {
        let m = 0.5 * (a + b);
        let fm = stat(m, i + 2)?;
        hist.push((m, fm));
        if fm.signum() == fa.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    Ok((0.5 * (a + b), hist))
}

/// Binder cumulant `1 − ⟨M⁴⟩/(3⟨M²⟩²)` of the Ising model on the torus, with a batch
/// jackknife standard error.
pub fn binder_cumulant(l: usize, beta: f64, nsamples: usize, rng: &mut RngStream) -> Result<(f64, f64)> {
    let g = build_torus(2, l, 1.0)?;
    let mut sw = SwendsenWang::new(&g, None, beta);
    for _ in 0..burn_in(nsamples) {
        sw.step(rng);
    }
    let n = g.vertex_count() as f64;
    let (mut m2, mut m4) = (Vec::with_capacity(nsamples), Vec::with_capacity(nsamples));
    for _ in 0..nsamples {
        sw.step(rng);
        let m = sw.spins.s.iter().map(|&s| f64::from(s)).sum::<f64>() / n;
        m2.push(m * m);
        m4.push(m.powi(4));
    }
    let u = |a: f64, b: f64| 1.0 - b / (3.0 * a * a);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let full = u(mean(&m2), mean(&m4));
    let nb = 50usize.min(nsamples);
    let per = nsamples / nb;
    let (s2, s4): (f64, f64) = (m2[..nb * per].iter().sum(), m4[..nb * per].iter().sum());
    let jack: Vec<f64> = (0..nb)
        .map(|i| {
            let b2: f64 = m2[i * per..(i + 1) * per].iter().sum();
            let b4: f64 = m4[i * per..(i + 1) * per].iter().sum();
            let k = ((nb - 1) * per) as f64;
            u((s2 - b2) / k, (s4 - b4) / k)
        })
        .collect();
    let jm = mean(&jack);
    let var = jack.iter().map(|x| (x - jm).powi(2)).sum::<f64>() * (nb - 1) as f64 / nb as f64;
    Ok((full, var.sqrt()))
}

/// Locates `β_c` for a model on a family.
///
/// - Torus, `q = 2` (all three models coincide without a boundary): bisection on the
///   sign of `U_{L₂}(β) − U_{L₁}(β)` for the two sizes given.
/// - Tree, free random-cluster: bisection on the sign of `μ̂ − 1`, where `μ̂` is the
///   per-generation growth of the expected number of depth-`d` vertices joined to the
///   root between depths `r/2` and `r` of the largest ball.
/// - Tree, wired random-cluster or Ising: the connection probability to the boundary
///   decays geometrically below `β_c` and converges above it, so no sign change exists;
///   the decay rate over the sizes is extrapolated to 1 over a grid of `grid` points
///   spanning the bracket.
pub fn betac_locate(
    model: BetacModel,
    family: Family,
    sizes: &[usize],
    bracket: (f64, f64),
    iters: usize,
    nsamples: usize,
    rng: &RngStream,
) -> Result<BetacReport> {
    if sizes.len() < 2 || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("betac needs at least two increasing sizes");
    }
    if !(bracket.0 < bracket.1 && bracket.0 >= 0.0) {
        return invalid("bracket must satisfy 0 <= lo < hi");
    }
    let q = match model {
        BetacModel::FkFree { q } | BetacModel::FkWired { q } => q,
        BetacModel::Ising => 2.0,
    };
    if !(q >= 1.0) {
        return invalid("q must be at least 1");
    }
    match family {
        Family::Torus { d } => {
            if d != 2 || q != 2.0 {
                return invalid("torus location is implemented for the 2D q = 2 model");
            }
            let (l1, l2) = (sizes[sizes.len() - 2], sizes[sizes.len() - 1]);
            let (beta_c, history) = bisect(bracket.0, bracket.1, iters, |b, i| {
                let u1 = binder_cumulant(l1, b, nsamples, &mut rng.substream(2 * i as u64))?.0;
                let u2 = binder_cumulant(l2, b, nsamples, &mut rng.substream(2 * i as u64 + 1))?.0;
                Ok(u2 - u1)
            })?;
            Ok(BetacReport { model, family, beta_c, history, method: format!("binder crossing L={l1},{l2}") })
        }
        Family::Tree { .. } => match model {
            BetacModel::FkFree { q } => {
                let r = *sizes.last().expect("sizes");
                let vol = family.volume(r, Mode::Free)?;
                let depth = vol.graph.distances(vol.origin);
                let (d1, d2) = (r / 2, r);
                let (beta_c, history) = bisect(bracket.0, bracket.1, iters, |b, i| {
                    let mut rr = rng.substream(i as u64);
                    let k: Vec<f64> = vol.graph.edges().iter().map(|e| b * e.j).collect();
                    let mut hb = FkHeatBath::new(&vol.graph, q, &k)?;
                    for _ in 0..burn_in(nsamples) {
                        hb.sweep(&mut rr);
                    }
                    let mut uf = UnionFind::new(vol.graph.vertex_count());
                    let (mut n1, mut n2) = (Vec::with_capacity(nsamples), Vec::with_capacity(nsamples));
                    for _ in 0..nsamples {
                        hb.sweep(&mut rr);
                        uf.reset();
                        for (e, ed) in vol.graph.edges().iter().enumerate() {
                            if hb.state.open[e] {
                                uf.union(ed.u, ed.v);
                            }
                        }
                        let root = uf.find(vol.origin);
                        let (mut a, mut c) = (0.0, 0.0);
                        for v in 0..vol.graph.vertex_count() {
                            if uf.find(v) == root {
                                if depth[v] == d1 {
                                    a += 1.0;
                                } else if depth[v] == d2 {
                                    c += 1.0;
                                }
                            }
                        }
                        n1.push(a);
                        n2.push(c);
                    }
                    let (m1, m2) = (batch_means(&n1, 50, 0).mean, batch_means(&n2, 50, 0).mean);
                    if m1 <= 0.0 || m2 <= 0.0 {
                        return Ok(-1.0);
                    }
                    Ok((m2 / m1).powf(1.0 / (d2 - d1) as f64) - 1.0)
                })?;
                Ok(BetacReport { model, family, beta_c, history, method: format!("free growth rate r={r}") })
            }
            BetacModel::FkWired { .. } | BetacModel::Ising => {
                let grid = (iters + 2).max(4);
                let mut rows = Vec::new();
                for gi in 0..grid {
                    let b = bracket.0 + (bracket.1 - bracket.0) * gi as f64 / (grid - 1) as f64;
                    for (si, &r) in sizes.iter().enumerate() {
                        let vol = family.volume(r, Mode::Wired)?;
                        let bnd = vol.graph.boundary().expect("wired");
                        let mut rr = rng.substream((gi * sizes.len() + si) as u64);
                        let mut xs = Vec::with_capacity(nsamples);
                        let mut uf = UnionFind::new(vol.graph.vertex_count());
                        let record = |open: &[bool], uf: &mut UnionFind| {
                            uf.reset();
                            for (e, ed) in vol.graph.edges().iter().enumerate() {
                                if open[e] {
                                    uf.union(ed.u, ed.v);
                                }
                            }
                            f64::from(u8::from(uf.connected(vol.origin, bnd)))
                        };
                        if q == 2.0 {
                            let mut sw = SwendsenWang::new(&vol.graph, Some(bnd), b);
                            for _ in 0..burn_in(nsamples) {
                                sw.step(&mut rr);
                            }
                            for _ in 0..nsamples {
                                sw.step(&mut rr);
                                xs.push(record(&sw.bonds.open, &mut uf));
                            }
                        } else {
                            let k: Vec<f64> = vol.graph.edges().iter().map(|e| b * e.j).collect();
                            let mut hb = FkHeatBath::new(&vol.graph, q, &k)?;
                            for _ in 0..burn_in(nsamples) {
                                hb.sweep(&mut rr);
                            }
                            for _ in 0..nsamples {
                                hb.sweep(&mut rr);
                                xs.push(record(&hb.state.open, &mut uf));
                            }
                        }
                        let s = batch_means(&xs, 50, rng.seed());
                        rows.push(ScanRow {
                            beta: b,
                            h: 0.0,
                            size: r,
                            observable: "connect_boundary".into(),
                            estimate: s.mean,
                            se: s.se,
                            nsamples: nsamples as u64,
                            seed: rng.seed(),
                        });
                    }
                }
                let fit = magnetization_onset(&ScanTable::new(rows), "connect_boundary", 0.0, 0.9)?;
                let history = fit.rates.iter().map(|d| (d.beta, d.lambda)).collect();
                Ok(BetacReport { model, family, beta_c: fit.beta_c, history, method: "wired decay-rate extrapolation".into() })
            }
        },
    }
}

/// Row-to-row transfer matrix of the Ising model on a periodic strip of `width` spins,
/// in the symmetric split form.
pub fn strip_transfer_matrix(width: usize, beta: f64) -> Result<DMatrix<f64>> {
    if !(2..=12).contains(&width) {
        return invalid("strip width must lie in 2..=12");
    }
    let n = 1usize << width;
    let spin = |s: usize, i: usize| if (s >> i) & 1 == 1 { -1.0 } else { 1.0 };
    let intra: Vec<f64> = (0..n)
        .map(|s| (0..width).map(|i| spin(s, i) * spin(s, (i + 1) % width)).sum::<f64>())
        .map(|e| (0.5 * beta * e).exp())
        .collect();
    Ok(DMatrix::from_fn(n, n, |a, b| {
        let inter: f64 = (0..width).map(|i| spin(a, i) * spin(b, i)).sum();
        intra[a] * (beta * inter).exp() * intra[b]
    }))
}

/// Correlation length `1 / ln(λ₀/|λ₁|)` along a periodic strip.
pub fn strip_correlation_length(width: usize, beta: f64) -> Result<f64> {
    let t = strip_transfer_matrix(width, beta)?;
    let mut ev: Vec<f64> = SymmetricEigen::new(t).eigenvalues.iter().map(|x| x.abs()).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    Ok(1.0 / (ev[0] / ev[1]).ln())
}

/// Phenomenological-renormalisation estimate of `β_c`: the crossing of
/// `ξ_{w₁}/w₁` and `ξ_{w₂}/w₂`, by bisection on `[lo, hi]`.
pub fn strip_crossing(w1: usize, w2: usize, lo: f64, hi: f64) -> Result<f64> {
    let f = |b: f64, _: usize| -> Result<f64> { Ok(strip_correlation_length(w2, b)? / w2 as f64 - strip_correlation_length(w1, b)? / w1 as f64) };
    Ok(bisect(lo, hi, 40, f)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transfer_matrix_partition_function_on_small_torus() {
        // Tr T² is the partition function of 2 rows of 3 periodic spins with doubled vertical bonds
        let beta = 0.37;
        let t = strip_transfer_matrix(3, beta).unwrap();
        let tr = (&t * &t).trace();
        let mut z = 0.0;
        for s in 0..64usize {
            let sp = |r: usize, c: usize| if (s >> (3 * r + c)) & 1 == 1 { -1.0 } else { 1.0 };
            let mut e = 0.0;
            for r in 0..2 {
                for c in 0..3 {
                    e += sp(r, c) * sp(r, (c + 1) % 3);
                    e += sp(r, c) * sp((r + 1) % 2, c);
                }
            }
            z += (beta * e).exp();
        }
        assert!((tr - z).abs() < 1e-9 * z, "{tr} vs {z}");
    }

    #[test]
    fn strip_oracle_near_onsager() {
        let b = strip_crossing(5, 6, 0.38, 0.5).unwrap();
        assert!((b - 0.5 * (1.0 + 2f64.sqrt()).ln()).abs() < 0.01, "{b}");
    }

    #[test]
    fn non_bracketing_is_an_error() {
        assert!(bisect(0.0, 1.0, 5, |b, _| Ok(b + 1.0)).is_err());
    }
}
