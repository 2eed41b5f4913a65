use super::magnitudes::ExactCurrentSampler;
use crate::error::{invalid, Result};
use crate::graph::{Bc, FieldGraph, FiniteVolume, Mode, WeightedGraph};
use crate::model::CurrentConfig;
use crate::rng::RngStream;

/// Parameters `(β₁, h₁) ≤ (β₂, h₂)` of the mismatched double current.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QParams {
    pub beta1: f64,
    pub h1: f64,
    pub beta2: f64,
    pub h2: f64,
}

impl QParams {
    pub fn new(beta1: f64, h1: f64, beta2: f64, h2: f64) -> Result<Self> {
        if !(0.0 <= beta1 && beta1 <= beta2 && 0.0 <= h1 && h1 <= h2) {
            return invalid("need 0 <= beta1 <= beta2 and 0 <= h1 <= h2");
        }
        if !(beta2 > 0.0) || !beta2.is_finite() || !h2.is_finite() {
            return invalid("beta2 must be positive and finite");
        }
        Ok(QParams { beta1, h1, beta2, h2 })
    }

    pub fn theta(&self) -> f64 {
        1.0 - self.beta1 / self.beta2
    }

    /// `1 − β₁h₁/(β₂h₂)`, and `1` when `h₁ = 0`.
    pub fn phi(&self) -> f64 {
        if self.h1 == 0.0 {
            1.0
        } else {
            1.0 - self.beta1 * self.h1 / (self.beta2 * self.h2)
        }
    }
}

/// A sample `(n₁, n₂)` of the mismatched double current on a working graph. Entry
/// `x` of every array is working-graph edge `x` (a base edge or a field edge).
#[derive(Clone, Debug, PartialEq)]
pub struct QPair {
    pub n1: CurrentConfig,
    /// `(n₂(x₁), n₂(x₂))`.
    pub n2_split: Vec<(u32, u32)>,
    pub params: QParams,
}

impl QPair {
    pub fn one_open(&self, x: usize) -> bool {
        self.n1.n[x] + self.n2_split[x].0 > 0
    }

    pub fn two_open(&self, x: usize) -> bool {
        self.one_open(x) || self.n2_split[x].1 > 0
    }

    /// `n₂(x₁) + n₂(x₂)`.
    pub fn aggregate(&self, x: usize) -> u32 {
        self.n2_split[x].0 + self.n2_split[x].1
    }
}

/// Reusable sampler of `Q` on a wired volume; the field is merged into the boundary.
#[derive(Clone, Debug)]
pub struct QSampler {
    pub fg: FieldGraph,
    pub params: QParams,
    first: ExactCurrentSampler,
    second: ExactCurrentSampler,
}

impl QSampler {
    pub fn new(vol: &FiniteVolume, params: QParams) -> Result<Self> {
        if vol.mode != Mode::Wired {
            return invalid("the mismatched double current is defined on wired volumes");
        }
        let fg = FieldGraph::new(&vol.graph, params.h2, Bc::Plus)?;
        let m = fg.base_edges();
        let act = |beta: f64, h: f64| -> Vec<f64> {
            (0..fg.graph.edge_count()).map(|x| if x < m { beta * fg.graph.edge(x).j } else { beta * h }).collect()
        };
        let first = ExactCurrentSampler::new(&fg.graph, act(params.beta1, params.h1))?;
        let second = ExactCurrentSampler::new(&fg.graph, act(params.beta2, params.h2))?;
        Ok(QSampler { fg, params, first, second })
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.fg.graph
    }

    pub fn sample(&self, rng: &mut RngStream) -> QPair {
        let n1 = self.first.sample(rng);
        let m2 = self.second.sample(rng);
        let m = self.fg.base_edges();
        let (keep_e, keep_v) = (1.0 - self.params.theta(), 1.0 - self.params.phi());
        let n2_split = m2
            .n
            .iter()
            .enumerate()
            .map(|(x, &k)| {
                let first = rng.binomial(k, if x < m { keep_e } else { keep_v });
                (first, k - first)
            })
            .collect();
        QPair { n1, n2_split, params: self.params }
    }
}

/// One draw of `Q_{β₁,h₁,β₂,h₂}` on the wired volume `vol`.
pub fn sample_q(vol: &FiniteVolume, p1: (f64, f64), p2: (f64, f64), rng: &mut RngStream) -> Result<QPair> {
    let s = QSampler::new(vol, QParams::new(p1.0, p1.1, p2.0, p2.1)?)?;
    Ok(s.sample(rng))
}

/// Vertices joined to `start` by `open` working-graph edges other than `skip`.
fn cluster_off(g: &WeightedGraph, start: usize, skip: usize, open: &dyn Fn(usize) -> bool) -> Vec<bool> {
    let mut seen = vec![false; g.vertex_count()];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(a) = stack.pop() {
        for &(e, b) in g.incident(a) {
            if e != skip && !seen[b] && open(e) {
                seen[b] = true;
                stack.push(b);
            }
        }
    }
    seen
}

/// The event `𝒜_x` for working-graph edge `x`.
///
/// A base edge `e = xy` and a vertex `v` (field edge `v`–root) are handled alike.
/// A cluster is `i`-infinite when it contains the root, which is the boundary and
/// the endpoint of every field edge: meeting the boundary or containing an
/// `i`-open vertex.
pub fn detect_event_a(qp: &QPair, x: usize, fg: &FieldGraph) -> Result<bool> {
    let g = &fg.graph;
    if x >= g.edge_count() || qp.n1.n.len() != g.edge_count() {
        return invalid("element is not in the graph");
    }
    let root = fg.root.expect("wired volume has a root");
    let ed = g.edge(x);
    let (u, v) = (ed.u, ed.v);
    if !(qp.n1.n[x] == 0 && qp.n2_split[x].0 == 1) {
        return Ok(false);
    }
    let one = |e: usize| qp.one_open(e);
    let two = |e: usize| qp.two_open(e);
    let k1u = cluster_off(g, u, x, &one);
    let k1v = cluster_off(g, v, x, &one);
    let joined1 = k1u[v];
    let both_inf1 = k1u[root] && k1v[root];
    if joined1 || both_inf1 {
        return Ok(false);
    }
    if qp.n2_split[x].1 > 0 {
        return Ok(true);
    }
    let k2u = cluster_off(g, u, x, &two);
    let k2v = cluster_off(g, v, x, &two);
    Ok(k2u[v] || (k2u[root] && k2v[root]))
}

/// `β₁J_x(⟨σ_x⟩⁺_{β₂,h₂} − ⟨σ_x⟩⁺_{β₁,h₁})` on the volume, exactly, for working edge
/// `x` of the sampler's graph (`J_x = h₁` for a vertex).
pub fn gradient_lhs(vol: &FiniteVolume, params: QParams, x: usize) -> Result<f64> {
    let fg = FieldGraph::new(&vol.graph, params.h2, Bc::Plus)?;
    let ed = *fg.graph.edge(x);
    let j = if x < fg.base_edges() { ed.j } else { params.h1 };
    let mag = |beta: f64, h: f64| -> Result<f64> {
        let p = crate::model::ModelParams::ising(beta, h)?;
        crate::exact::ising_expectation(vol, &p, |s| f64::from(s[ed.u] * s[ed.v]), Bc::Plus)
    };
    Ok(params.beta1 * j * (mag(params.beta2, params.h2)? - mag(params.beta1, params.h1)?))
}

/// One working element `x` of the gradient bound: the exact left side against the
/// Monte Carlo probability of `𝒜_x` under `Q`.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GradientBoundRow {
    pub x: usize,
    pub lhs: f64,
    pub event: crate::stats::EstimatorSummary,
}

impl GradientBoundRow {
    /// Binomial standard error of the event frequency at `p = lhs`, the boundary of
    /// the tested hypothesis `Q(𝒜_x) ≥ lhs`. Unlike the plug-in error it does not
    /// collapse when few events are seen.
    pub fn null_se(&self) -> f64 {
        let p = self.lhs.clamp(0.0, 1.0);
        (p * (1.0 - p) / self.event.n as f64).sqrt()
    }

    pub fn passes(&self) -> bool {
        self.lhs <= self.event.mean + 3.0 * self.null_se()
    }
}

/// Checks `β₁J_x Δ⟨σ_x⟩ ≤ Q(𝒜_x)` for every working element of a wired volume.
pub fn gradient_bound_check(vol: &FiniteVolume, params: QParams, nsamples: usize, rng: &mut RngStream) -> Result<Vec<GradientBoundRow>> {
    if nsamples < 100 {
        return invalid("need at least 100 samples");
    }
    let s = QSampler::new(vol, params)?;
    let m = s.graph().edge_count();
    let mut hits = vec![crate::stats::Moments::new(); m];
    for _ in 0..nsamples {
        let q = s.sample(rng);
        for (x, h) in hits.iter_mut().enumerate() {
            h.push(f64::from(u8::from(detect_event_a(&q, x, &s.fg)?)));
        }
    }
    // draws are independent, so the plain standard error applies
    hits.iter()
        .enumerate()
        .map(|(x, h)| Ok(GradientBoundRow { x, lhs: gradient_lhs(vol, params, x)?, event: h.summary(rng.seed()) }))
        .collect()
}
