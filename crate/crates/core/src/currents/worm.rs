use crate::error::Result;
use crate::graph::{FieldGraph, FiniteVolume, WeightedGraph};
use crate::model::{LoopConfig, ModelParams};
use crate::rng::RngStream;

/// Worm chain for the loop O(1) model with weights `∏ t_e^{ω(e)}`.
///
/// The state holds two defects `tail` and `head`; `∂ω = {tail, head}` when they
/// differ and `∂ω = ∅` when they coincide. Only the head moves. A move picks a
/// uniform incident edge of the head, flips it and moves the head across, with the
/// Metropolis ratio `t^{±1} · deg(head) / deg(next)` (the degree factor corrects
/// the non-uniform proposal). In the closed state, half of the steps reseed both
/// defects at a uniform vertex.
#[derive(Clone, Debug)]
pub struct Worm<'a> {
    g: &'a WeightedGraph,
    t: Vec<f64>,
    bits: Vec<bool>,
    tail: usize,
    head: usize,
}

impl<'a> Worm<'a> {
    pub fn new(g: &'a WeightedGraph, beta: f64) -> Self {
        let t = g.edges().iter().map(|e| (beta * e.j).tanh()).collect();
        Self::with_weights(g, t)
    }

    pub fn with_weights(g: &'a WeightedGraph, t: Vec<f64>) -> Self {
        Worm { g, t, bits: vec![false; g.edge_count()], tail: 0, head: 0 }
    }

    pub fn is_closed(&self) -> bool {
        self.tail == self.head
    }

    pub fn defects(&self) -> (usize, usize) {
        (self.tail, self.head)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn config(&self) -> LoopConfig {
        LoopConfig { bits: self.bits.clone() }
    }

    pub fn step(&mut self, rng: &mut RngStream) {
        let n = self.g.vertex_count();
        if n == 0 {
            return;
        }
        if self.is_closed() && rng.uniform() < 0.5 {
            let v = rng.below(n);
            self.tail = v;
            self.head = v;
            return;
        }
        let inc = self.g.incident(self.head);
        if inc.is_empty() {
            return;
        }
        let (e, next) = inc[rng.below(inc.len())];
        let w = if self.bits[e] { 1.0 / self.t[e] } else { self.t[e] };
        let ratio = w * inc.len() as f64 / self.g.degree(next) as f64;
        let u = rng.uniform();
        if u < ratio {
            self.bits[e] = !self.bits[e];
            self.head = next;
        }
    }

    /// Advances through `visits` closed states.
    ///
    /// The chain watched only at its closed times is stationary with the loop law,
    /// so draws separated by a fixed number of closed visits are unbiased. Stopping
    /// at the first closed time after a fixed number of steps would not be.
    pub fn run_closed(&mut self, visits: usize, rng: &mut RngStream) {
        let mut seen = 0;
        while seen < visits {
            self.step(rng);
            if self.is_closed() {
                seen += 1;
            }
        }
    }
}

/// Worm run on the natural working graph of `vol` at `(β, h)`; returns a sourceless
/// configuration indexed by working-graph edges.
pub fn worm_run(vol: &FiniteVolume, p: &ModelParams, visits: usize, rng: &mut RngStream) -> Result<LoopConfig> {
    let fg = FieldGraph::natural(&vol.graph, p.h)?;
    let mut w = Worm::new(&fg.graph, p.beta);
    w.run_closed(visits.max(1), rng);
    let out = w.config();
    debug_assert!(out.is_sourceless(&fg.graph));
    Ok(out)
}
