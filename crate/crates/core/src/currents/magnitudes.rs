use crate::error::Result;
use crate::exact::{loop_distribution_with, LoopDistribution};
use crate::graph::WeightedGraph;
use crate::model::{CurrentConfig, LoopConfig, PercConfig};
use crate::rng::RngStream;

const MAX_TERMS: u32 = 100_000;

/// Draws `n` with `P(n) ∝ a^n / n!` restricted to odd `n` (`odd = true`) or even
/// `n ≥ 0`, by inverting the cumulative sum.
pub fn parity_magnitude(a: f64, odd: bool, rng: &mut RngStream) -> u32 {
    if a <= 0.0 {
        return u32::from(odd);
    }
    let total = if odd { a.sinh() } else { a.cosh() };
    let target = rng.uniform() * total;
    let mut n = u32::from(odd);
    let mut term = if odd { a } else { 1.0 };
    let mut acc = term;
    while acc <= target && n < MAX_TERMS {
        term *= a * a / (f64::from(n + 1) * f64::from(n + 2));
        n += 2;
        acc += term;
        if term == 0.0 {
            break;
        }
    }
    n
}

/// Independent magnitudes with the prescribed parities, activity `a_x = βJ_x`.
pub fn magnitudes_from_parities(g: &WeightedGraph, l: &LoopConfig, beta: f64, rng: &mut RngStream) -> CurrentConfig {
    let a: Vec<f64> = g.edges().iter().map(|e| beta * e.j).collect();
    magnitudes_with(&a, l, rng)
}

pub fn magnitudes_with(a: &[f64], l: &LoopConfig, rng: &mut RngStream) -> CurrentConfig {
    CurrentConfig { n: a.iter().zip(&l.bits).map(|(&ax, &odd)| parity_magnitude(ax, odd, rng)).collect() }
}

/// FK-Ising sample as the union of the current support and independent
/// `Bernoulli(1 − e^{−βJ_x})` bits.
pub fn lupu_werner_fk(g: &WeightedGraph, n: &CurrentConfig, beta: f64, rng: &mut RngStream) -> PercConfig {
    let open = g
        .edges()
        .iter()
        .zip(&n.n)
        .map(|(e, &k)| {
            let u = rng.uniform();
            k > 0 || u < -(-beta * e.j).exp_m1()
        })
        .collect();
    PercConfig { open }
}

/// Sprinkling rate on top of a loop O(1) sample that yields the same FK law:
/// `P(Even_x > 0) + P(Even_x = 0)(1 − e^{−a})`.
pub fn loop_sprinkle_rate(a: f64) -> f64 {
    1.0 - 1.0 / a.cosh() + (1.0 - (-a).exp()) / a.cosh()
}

/// FK-Ising sample as a loop O(1) sample plus independent sprinkling.
pub fn lupu_werner_from_loops(g: &WeightedGraph, l: &LoopConfig, beta: f64, rng: &mut RngStream) -> PercConfig {
    let open = g
        .edges()
        .iter()
        .zip(&l.bits)
        .map(|(e, &b)| {
            let u = rng.uniform();
            b || u < loop_sprinkle_rate(beta * e.j)
        })
        .collect();
    PercConfig { open }
}

/// Independent draws from an enumerated loop O(1) law.
#[derive(Clone, Debug)]
pub struct ExactLoopSampler {
    edge_count: usize,
    masks: Vec<u64>,
    cdf: Vec<f64>,
}

impl ExactLoopSampler {
    /// Loop law with per-edge activities `a_e` (weights `tanh a_e`).
    pub fn new(g: &WeightedGraph, a: &[f64]) -> Result<Self> {
        let t: Vec<f64> = a.iter().map(|x| x.tanh()).collect();
        Ok(Self::from_distribution(&loop_distribution_with(g, &t)?))
    }

    pub fn from_distribution(d: &LoopDistribution) -> Self {
        let mut acc = 0.0;
        let cdf = d
            .probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        ExactLoopSampler { edge_count: d.edge_count, masks: d.masks.clone(), cdf }
    }

    pub fn sample_mask(&self, rng: &mut RngStream) -> u64 {
        let u = rng.uniform() * self.cdf.last().copied().unwrap_or(1.0);
        let i = self.cdf.partition_point(|&c| c <= u).min(self.masks.len() - 1);
        self.masks[i]
    }

    pub fn sample(&self, rng: &mut RngStream) -> LoopConfig {
        let m = self.sample_mask(rng);
        LoopConfig { bits: (0..self.edge_count).map(|e| m >> e & 1 == 1).collect() }
    }
}

/// Independent random currents: exact loop parities plus magnitudes.
#[derive(Clone, Debug)]
pub struct ExactCurrentSampler {
    a: Vec<f64>,
    loops: ExactLoopSampler,
}

impl ExactCurrentSampler {
    pub fn new(g: &WeightedGraph, a: Vec<f64>) -> Result<Self> {
        let loops = ExactLoopSampler::new(g, &a)?;
        Ok(ExactCurrentSampler { a, loops })
    }

    pub fn at_beta(g: &WeightedGraph, beta: f64) -> Result<Self> {
        Self::new(g, g.edges().iter().map(|e| beta * e.j).collect())
    }

    pub fn sample(&self, rng: &mut RngStream) -> CurrentConfig {
        let l = self.loops.sample(rng);
        magnitudes_with(&self.a, &l, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sprinkle_rate_is_tanh() {
        for a in [0.0, 0.1, 0.7, 2.5] {
            assert!((loop_sprinkle_rate(a) - f64::tanh(a)).abs() < 1e-15);
        }
    }

    #[test]
    fn parities_are_respected() {
        let mut rng = RngStream::new(1, 0);
        for _ in 0..500 {
            assert_eq!(parity_magnitude(1.3, true, &mut rng) % 2, 1);
            assert_eq!(parity_magnitude(1.3, false, &mut rng) % 2, 0);
        }
        assert_eq!(parity_magnitude(0.0, false, &mut rng), 0);
    }

    #[test]
    fn even_zero_frequency() {
        let mut rng = RngStream::new(2, 0);
        let a = 0.4;
        let k = 200_000;
        let zeros = (0..k).filter(|_| parity_magnitude(a, false, &mut rng) == 0).count() as f64 / k as f64;
        let p = 1.0 / f64::cosh(a);
        let se = (p * (1.0 - p) / k as f64).sqrt();
        assert!((zeros - p).abs() < 4.0 * se);
    }

    #[test]
    fn zero_current_zero_beta_closed() {
        let g = crate::graph::cycle_graph(4, 1.0).unwrap();
        let mut rng = RngStream::new(3, 0);
        let w = lupu_werner_fk(&g, &CurrentConfig::zero(4), 0.0, &mut rng);
        assert_eq!(w.open_count(), 0);
    }
}
