use crate::error::{invalid, Result};
use crate::graph::{FieldGraph, FiniteVolume, WeightedGraph};
use crate::model::{PercConfig, SpinConfig};
use crate::rng::RngStream;
use crate::unionfind::UnionFind;

/// Opens each satisfied edge (`σ_u σ_v = +1`) with probability `1 − e^{−2βJ_e}`.
///
/// Field edges join a vertex to the `+1` root, so they open only at `+1` vertices.
pub fn es_fk_from_spins(g: &WeightedGraph, s: &SpinConfig, beta: f64, rng: &mut RngStream) -> PercConfig {
    let open = g
        .edges()
        .iter()
        .map(|e| {
            let u = rng.uniform();
            s.s[e.u] == s.s[e.v] && u < -(-2.0 * beta * e.j).exp_m1()
        })
        .collect();
    PercConfig { open }
}

/// Constant spins on clusters: `+1` on the root cluster, fair coins elsewhere.
pub fn es_spins_from_fk(g: &WeightedGraph, root: Option<usize>, w: &PercConfig, rng: &mut RngStream) -> SpinConfig {
    let n = g.vertex_count();
    let mut uf = UnionFind::new(n);
    for (e, ed) in g.edges().iter().enumerate() {
        if w.open[e] {
            uf.union(ed.u, ed.v);
        }
    }
    let (label, k) = uf.labels();
    let mut sign: Vec<i8> = (0..k).map(|_| rng.sign()).collect();
    if let Some(r) = root {
        sign[label[r] as usize] = 1;
    }
    SpinConfig { s: label.iter().map(|&l| sign[l as usize]).collect() }
}

/// Swendsen–Wang chain for `q = 2`: alternate the two Edwards–Sokal maps.
#[derive(Clone, Debug)]
pub struct SwendsenWang<'a> {
    g: &'a WeightedGraph,
    root: Option<usize>,
    beta: f64,
    pub spins: SpinConfig,
    pub bonds: PercConfig,
}

impl<'a> SwendsenWang<'a> {
    pub fn new(g: &'a WeightedGraph, root: Option<usize>, beta: f64) -> Self {
        SwendsenWang {
            g,
            root,
            beta,
            spins: SpinConfig::all_plus(g.vertex_count()),
            bonds: PercConfig::closed(g.edge_count()),
        }
    }

    pub fn step(&mut self, rng: &mut RngStream) {
        self.bonds = es_fk_from_spins(self.g, &self.spins, self.beta, rng);
        self.spins = es_spins_from_fk(self.g, self.root, &self.bonds, rng);
    }
}

/// Single-bond heat-bath chain for the random-cluster model with the root as hub.
#[derive(Clone, Debug)]
pub struct FkHeatBath<'a> {
    g: &'a WeightedGraph,
    q: f64,
    /// Bernoulli parameter `1 − e^{−2βJ_e}` per edge.
    p: Vec<f64>,
    /// Conditional open probability when the endpoints are not otherwise joined.
    p_split: Vec<f64>,
    pub state: PercConfig,
    mark: Vec<u32>,
    epoch: u32,
    queue: Vec<usize>,
}

impl<'a> FkHeatBath<'a> {
    /// `couplings[e]` is `βJ_e` for every working-graph edge (zero keeps it closed).
    pub fn new(g: &'a WeightedGraph, q: f64, couplings: &[f64]) -> Result<Self> {
        if !(q >= 1.0) {
            return invalid("cluster weight q must be at least 1");
        }
        if couplings.len() != g.edge_count() {
            return invalid("one coupling per working edge is required");
        }
        let p: Vec<f64> = couplings.iter().map(|&k| -(-2.0 * k).exp_m1()).collect();
        let p_split = p.iter().map(|&x| x / (x + q * (1.0 - x))).collect();
        Ok(FkHeatBath {
            g,
            q,
            p,
            p_split,
            state: PercConfig::closed(g.edge_count()),
            mark: vec![0; g.vertex_count()],
            epoch: 0,
            queue: Vec::new(),
        })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Are `u` and `v` joined by open edges other than `skip`?
    pub fn joined_off(&mut self, u: usize, v: usize, skip: usize) -> bool {
        if u == v {
            return true;
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.epoch = 1;
        }
        self.queue.clear();
        self.queue.push(u);
        self.mark[u] = self.epoch;
        let mut head = 0;
        while head < self.queue.len() {
            let x = self.queue[head];
            head += 1;
            for &(e, y) in self.g.incident(x) {
                if e == skip || !self.state.open[e] || self.mark[y] == self.epoch {
                    continue;
                }
                if y == v {
                    return true;
                }
                self.mark[y] = self.epoch;
                self.queue.push(y);
            }
        }
        false
    }

    /// Conditional probability that `e` is open given the rest of the configuration.
    pub fn conditional(&mut self, e: usize) -> f64 {
        let ed = *self.g.edge(e);
        if self.p[e] == 0.0 {
            return 0.0;
        }
        if self.joined_off(ed.u, ed.v, e) {
            self.p[e]
        } else {
            self.p_split[e]
        }
    }

    #[inline]
    pub fn update(&mut self, e: usize, u: f64) {
        let c = self.conditional(e);
        self.state.open[e] = u < c;
    }

    pub fn sweep(&mut self, rng: &mut RngStream) {
        for e in 0..self.g.edge_count() {
            let u = rng.uniform();
            self.update(e, u);
        }
    }
}

/// Two heat-bath chains driven by the same uniforms.
#[derive(Clone, Debug)]
pub struct CoupledFk<'a> {
    pub low: FkHeatBath<'a>,
    pub high: FkHeatBath<'a>,
    pub sweeps: u64,
    pub ordered_sweeps: u64,
}

impl<'a> CoupledFk<'a> {
    pub fn new(g: &'a WeightedGraph, q: f64, low: &[f64], high: &[f64]) -> Result<Self> {
        if low.iter().zip(high).any(|(a, b)| a > b) {
            return invalid("coupled chains need ordered couplings");
        }
        Ok(CoupledFk { low: FkHeatBath::new(g, q, low)?, high: FkHeatBath::new(g, q, high)?, sweeps: 0, ordered_sweeps: 0 })
    }

    /// One sweep of both chains; returns whether `ω_low ≤ ω_high` afterwards.
    pub fn sweep(&mut self, rng: &mut RngStream) -> bool {
        for e in 0..self.low.g.edge_count() {
            let u = rng.uniform();
            self.low.update(e, u);
            self.high.update(e, u);
        }
        let ok = self.low.state.le(&self.high.state);
        debug_assert!(ok, "monotone coupling lost its ordering");
        self.sweeps += 1;
        self.ordered_sweeps += u64::from(ok);
        ok
    }
}

/// Per-edge couplings `βJ_e` (base edges) and `βh` (field edges) on a working graph
/// built for the larger field.
pub fn couplings(fg: &FieldGraph, beta: f64, h: f64) -> Vec<f64> {
    (0..fg.graph.edge_count())
        .map(|we| if we < fg.base_edges() { beta * fg.graph.edge(we).j } else { beta * h })
        .collect()
}

/// Grimmett coupling of `φ_{q,β₁,h₁}` and `φ_{q,β₂,h₂}` on `vol` by `sweeps` shared
/// heat-bath sweeps from the all-closed state.
pub fn fk_heatbath_coupled(
    vol: &FiniteVolume,
    q: f64,
    p1: (f64, f64),
    p2: (f64, f64),
    sweeps: usize,
    rng: &mut RngStream,
) -> Result<(PercConfig, PercConfig)> {
    if p1.0 > p2.0 || p1.1 > p2.1 {
        return invalid("Grimmett coupling needs beta1 <= beta2 and h1 <= h2");
    }
    let fg = FieldGraph::natural(&vol.graph, p2.1)?;
    let lo = couplings(&fg, p1.0, p1.1);
    let hi = couplings(&fg, p2.0, p2.1);
    let mut ch = CoupledFk::new(&fg.graph, q, &lo, &hi)?;
    for _ in 0..sweeps.max(1) {
        if !ch.sweep(rng) {
            return Err(crate::error::invariant("grimmett_ordering", format!("violated at sweep {}", ch.sweeps)));
        }
    }
    Ok((ch.low.state, ch.high.state))
}
