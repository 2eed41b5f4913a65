//! Estimator summaries, running moments and weighted least squares.

use serde::{Deserialize, Serialize};

/// Sample mean with standard error, sample count and seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub mean: f64,
    pub se: f64,
    pub n: u64,
    pub seed: u64,
}

impl EstimatorSummary {
    /// True when `self.mean <= bound + k * se`.
    pub fn below(&self, bound: f64, k: f64) -> bool {
        self.mean <= bound + k * self.se
    }

    /// True when `|self.mean - target| <= k * se + abs_slack`.
    pub fn matches(&self, target: f64, k: f64, abs_slack: f64) -> bool {
        (self.mean - target).abs() <= k * self.se + abs_slack
    }
}

/// Welford running mean and variance.
#[derive(Clone, Copy, Debug, Default)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64) * (other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn se(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }

    pub fn summary(&self, seed: u64) -> EstimatorSummary {
        EstimatorSummary { mean: self.mean, se: self.se(), n: self.n, seed }
    }
}

/// Mean of a correlated series with a batch-means standard error.
pub fn batch_means(xs: &[f64], batches: usize, seed: u64) -> EstimatorSummary {
    let n = xs.len();
    let mut all = Moments::new();
    xs.iter().for_each(|&x| all.push(x));
    let b = batches.max(2).min(n.max(1));
    let per = n / b;
    if per == 0 {
        return all.summary(seed);
    }
    let mut bm = Moments::new();
    for i in 0..b {
        let s: f64 = xs[i * per..(i + 1) * per].iter().sum();
        bm.push(s / per as f64);
    }
    let se = (bm.variance() / b as f64).sqrt().max(all.se());
    EstimatorSummary { mean: all.mean(), se, n: n as u64, seed }
}

/// Weighted least-squares line fit `y = a + b x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub slope_se: f64,
}

pub fn weighted_line_fit(x: &[f64], y: &[f64], w: &[f64]) -> Option<LineFit> {
    if x.len() < 2 || x.len() != y.len() || x.len() != w.len() {
        return None;
    }
    let sw: f64 = w.iter().sum();
    let sx: f64 = x.iter().zip(w).map(|(a, b)| a * b).sum();
    let sy: f64 = y.iter().zip(w).map(|(a, b)| a * b).sum();
    let (mx, my) = (sx / sw, sy / sw);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..x.len() {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    // With inverse-variance weights the slope variance is 1 / sxx; inflate by the
    // reduced chi-square when the scatter exceeds the weights.
    let dof = (x.len() as f64 - 2.0).max(1.0);
    let chi2: f64 = (0..x.len())
        .map(|i| w[i] * (y[i] - my - slope * (x[i] - mx)).powi(2))
        .sum();
    let scale = (chi2 / dof).max(1.0);
    Some(LineFit { intercept: my - slope * mx, slope, slope_se: (scale / sxx).sqrt() })
}

/// Formats `x` with nine significant digits in a form that reparses exactly to the printed value.
pub fn sig9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.8e}");
    let v: f64 = s.parse().expect("formatted float reparses");
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
        let mut a = Moments::new();
        xs.iter().for_each(|&x| a.push(x));
        let mut b = Moments::new();
        let mut c = Moments::new();
        xs[..37].iter().for_each(|&x| b.push(x));
        xs[37..].iter().for_each(|&x| c.push(x));
        b.merge(&c);
        assert!((a.mean() - b.mean()).abs() < 1e-12);
        assert!((a.variance() - b.variance()).abs() < 1e-12);
    }

    #[test]
    fn exact_line_recovered() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let f = weighted_line_fit(&x, &y, &[1.0; 4]).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12);
        assert!((f.intercept - 2.0).abs() < 1e-12);
    }
}
