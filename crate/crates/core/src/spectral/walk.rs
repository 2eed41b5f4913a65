use crate::error::{invalid, invariant, Error, Result};
use crate::graph::WeightedGraph;

/// Largest vertex count handled by dense vector iteration.
pub const DENSE_WALK_LIMIT: usize = 1_000_000;

/// Simple random walk choosing an incident edge with probability `J_e / Σ J`.
///
/// On a wired volume the boundary vertex is absorbing and the walk is killed on
/// arrival, so the operator is the Dirichlet restriction to the interior.
pub struct WalkKernel<'a> {
    g: &'a WeightedGraph,
    killed: Option<usize>,
    inv_deg: Vec<f64>,
}

impl<'a> WalkKernel<'a> {
    pub fn new(g: &'a WeightedGraph) -> Result<Self> {
        if g.vertex_count() > DENSE_WALK_LIMIT {
            return Err(Error::SizeGuard(format!("{} vertices exceed the dense walk limit", g.vertex_count())));
        }
        let inv_deg = (0..g.vertex_count())
            .map(|v| {
                let w = g.weighted_degree(v);
                if w > 0.0 { 1.0 / w } else { 0.0 }
            })
            .collect();
        Ok(WalkKernel { g, killed: g.boundary(), inv_deg })
    }

    pub fn graph(&self) -> &WeightedGraph {
        self.g
    }

    /// Row sums of the kernel: 1 at every vertex with an incident edge.
    pub fn row_sum(&self, v: usize) -> f64 {
        self.g.incident(v).iter().map(|&(e, _)| self.g.edge(e).j * self.inv_deg[v]).sum()
    }

    /// One step of a distribution: `μ ↦ μP`.
    pub fn push(&self, mu: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (v, &m) in mu.iter().enumerate() {
            if m == 0.0 || Some(v) == self.killed {
                continue;
            }
            let s = m * self.inv_deg[v];
            for &(e, y) in self.g.incident(v) {
                out[y] += s * self.g.edge(e).j;
            }
        }
        if let Some(b) = self.killed {
            out[b] = 0.0;
        }
    }

    /// One step of a function: `f ↦ Pf` with `f = 0` on the killed vertex.
    pub fn apply(&self, f: &[f64], out: &mut [f64]) {
        for (v, o) in out.iter_mut().enumerate() {
            if Some(v) == self.killed {
                *o = 0.0;
                continue;
            }
            let mut acc = 0.0;
            for &(e, y) in self.g.incident(v) {
                if Some(y) != self.killed {
                    acc += self.g.edge(e).j * f[y];
                }
            }
            *o = acc * self.inv_deg[v];
        }
    }

    /// `p_n(o, o)` for `n = 0..=nmax`.
    pub fn returns(&self, o: usize, nmax: usize) -> Vec<f64> {
        let n = self.g.vertex_count();
        let (mut mu, mut nx) = (vec![0.0; n], vec![0.0; n]);
        mu[o] = 1.0;
        let mut out = Vec::with_capacity(nmax + 1);
        out.push(1.0);
        for _ in 0..nmax {
            self.push(&mu, &mut nx);
            std::mem::swap(&mut mu, &mut nx);
            out.push(mu[o]);
        }
        out
    }
}

/// `p_n(o, o)` by exact vector iteration.
pub fn return_probability(g: &WeightedGraph, o: usize, n: usize) -> Result<f64> {
    if o >= g.vertex_count() {
        return invalid("origin is not a vertex");
    }
    let k = WalkKernel::new(g)?;
    Ok(k.returns(o, n)[n])
}

/// Return probabilities at the root of the `k`-regular tree ball of radius `r`
/// with the walk killed beyond depth `r`, computed on the radial quotient chain.
pub fn tree_return_probabilities(k: usize, r: usize, nmax: usize) -> Result<Vec<f64>> {
    if k < 3 {
        return invalid("tree degree must be at least 3");
    }
    let out_p = (k - 1) as f64 / k as f64;
    let in_p = 1.0 / k as f64;
    let mut mu = vec![0.0; r + 1];
    let mut nx = vec![0.0; r + 1];
    mu[0] = 1.0;
    let mut res = vec![1.0];
    for _ in 0..nmax {
        nx.iter_mut().for_each(|x| *x = 0.0);
        if r > 0 {
            nx[1] += mu[0];
        }
        for d in 1..=r {
            nx[d - 1] += mu[d] * in_p;
            if d < r {
                nx[d + 1] += mu[d] * out_p;
            }
        }
        std::mem::swap(&mut mu, &mut nx);
        res.push(mu[0]);
    }
    Ok(res)
}

/// Sequence `p_{2n}(o,o)^{1/2n}` for `n = 1..=nmax/2` and its last term.
#[derive(Clone, Debug, PartialEq)]
pub struct RhoEstimate {
    pub sequence: Vec<f64>,
    /// Last term of the sequence, a lower bound for the spectral radius.
    pub rho_hat: f64,
}

impl RhoEstimate {
    /// Builds the sequence from return probabilities indexed by step count and
    /// checks that it is nondecreasing up to rounding.
    pub fn from_returns(p: &[f64]) -> Result<Self> {
        let mut sequence = Vec::new();
        for n in (2..p.len()).step_by(2) {
            if p[n] <= 0.0 {
                return invalid("return probability vanished; no even cycle through the origin");
            }
            sequence.push(p[n].powf(1.0 / n as f64));
        }
        let Some(&rho_hat) = sequence.last() else {
            return invalid("nmax must be at least 2");
        };
        for w in sequence.windows(2) {
            if w[1] < w[0] * (1.0 - 1e-12) {
                return Err(invariant("rho_monotone", format!("{} followed by {}", w[0], w[1])));
            }
        }
        Ok(RhoEstimate { sequence, rho_hat })
    }
}

/// Spectral radius estimate at `o` from `nmax` steps of exact vector iteration.
pub fn rho_graph_estimate(g: &WeightedGraph, o: usize, nmax: usize) -> Result<RhoEstimate> {
    if o >= g.vertex_count() {
        return invalid("origin is not a vertex");
    }
    RhoEstimate::from_returns(&WalkKernel::new(g)?.returns(o, nmax))
}

/// Same as [`rho_graph_estimate`] at the root of a tree ball, using the radial chain.
pub fn rho_tree_estimate(k: usize, r: usize, nmax: usize) -> Result<RhoEstimate> {
    RhoEstimate::from_returns(&tree_return_probabilities(k, r, nmax)?)
}
