use super::table::{ScanRow, ScanTable};
use crate::error::{invalid, Result};
use crate::stats::weighted_line_fit;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderFit {
    /// Slope of the upper envelope of `ln Δ` against `ln d`.
    pub delta: f64,
    /// Smallest `C` with `Δ ≤ C d^δ` over the fitted pairs.
    pub c: f64,
    /// Pair `((β, h), (β', h'))` maximising `Δ / d^δ`.
    pub worst: ((f64, f64), (f64, f64)),
    pub pairs: usize,
}

/// Empirical Hölder exponent of one observable at one size over all grid pairs.
///
/// Each difference is reduced by twice its combined standard error, so pure noise at
/// short distances does not enter the fit. Pairs are enumerated in grid order and
/// thinned to `pair_budget` by a fixed stride.
pub fn holder_probe(table: &ScanTable, observable: &str, size: usize, pair_budget: usize) -> Result<HolderFit> {
    let pts: Vec<&ScanRow> = table.slice(observable, size);
    let mut all = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            all.push((i, j));
        }
    }
    if all.is_empty() || pair_budget == 0 {
        return invalid("holder probe needs at least two grid points");
    }
    let stride = all.len().div_ceil(pair_budget);
    let mut pairs = Vec::new();
    for &(i, j) in all.iter().step_by(stride) {
        let (a, b) = (pts[i], pts[j]);
        let d = ((a.beta - b.beta).powi(2) + (a.h - b.h).powi(2)).sqrt();
        let diff = (a.estimate - b.estimate).abs() - 2.0 * (a.se * a.se + b.se * b.se).sqrt();
        if d > 0.0 && diff > 0.0 {
            pairs.push((d, diff, i, j));
        }
    }
    let mut dists: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    dists.sort_by(f64::total_cmp);
    dists.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    if dists.len() < 2 {
        let any_d = all.iter().any(|&(i, j)| pts[i].beta != pts[j].beta || pts[i].h != pts[j].h);
        if !any_d {
            return invalid("degenerate grid: all points coincide");
        }
        return invalid("fewer than two distinct distances carry a resolved difference");
    }
    // envelope: largest difference at each distinct distance
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for &d in &dists {
        let m = pairs.iter().filter(|p| (p.0 - d).abs() <= 1e-12 * d).map(|p| p.1).fold(0.0f64, f64::max);
        x.push(d.ln());
        y.push(m.ln());
    }
    let w = vec![1.0; x.len()];
    let fit = weighted_line_fit(&x, &y, &w).expect("two distinct distances");
    let delta = fit.slope;
    let (mut c, mut worst) = (0.0f64, (0, 0));
    for &(d, diff, i, j) in &pairs {
        let r = diff / d.powf(delta);
        if r > c {
            c = r;
            worst = (i, j);
        }
    }
    let at = |k: usize| (pts[k].beta, pts[k].h);
    Ok(HolderFit { delta, c, worst: (at(worst.0), at(worst.1)), pairs: pairs.len() })
}

/// Keeps every `stride`-th distinct `β` of the table (all `h`), for grid refinement studies.
pub fn coarsen_beta(table: &ScanTable, stride: usize) -> ScanTable {
    let mut betas: Vec<f64> = table.rows.iter().map(|r| r.beta).collect();
    betas.sort_by(f64::total_cmp);
    betas.dedup();
    let keep: Vec<f64> = betas.into_iter().step_by(stride.max(1)).collect();
    ScanTable::new(table.rows.iter().filter(|r| keep.contains(&r.beta)).cloned().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(f: impl Fn(f64) -> f64, n: usize) -> ScanTable {
        ScanTable::new(
            (0..n)
                .map(|i| {
                    let beta = i as f64 / (n - 1) as f64;
                    ScanRow { beta, h: 0.0, size: 1, observable: "m".into(), estimate: f(beta), se: 0.0, nsamples: 1, seed: 0 }
                })
                .collect(),
        )
    }

    #[test]
    fn lipschitz_and_square_root() {
        let lin = holder_probe(&table(|b| 2.0 * b, 21), "m", 1, 10_000).unwrap();
        assert!((lin.delta - 1.0).abs() < 1e-9 && (lin.c - 2.0).abs() < 1e-9);
        let sq = holder_probe(&table(|b| (b - 0.5).max(0.0).sqrt(), 41), "m", 1, 10_000).unwrap();
        assert!((sq.delta - 0.5).abs() < 0.1, "{}", sq.delta);
    }

    #[test]
    fn degenerate_grid_rejected() {
        let t = ScanTable::new(vec![
            ScanRow { beta: 0.5, h: 0.0, size: 1, observable: "m".into(), estimate: 0.2, se: 0.0, nsamples: 1, seed: 0 },
            ScanRow { beta: 0.5, h: 0.0, size: 1, observable: "m".into(), estimate: 0.3, se: 0.0, nsamples: 1, seed: 1 },
        ]);
        assert!(holder_probe(&t, "m", 1, 10).is_err());
    }
}
