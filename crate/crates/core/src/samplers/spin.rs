use crate::graph::{Bc, FieldGraph, FiniteVolume, WeightedGraph};
use crate::model::{ModelParams, SpinConfig};
use crate::rng::RngStream;
use crate::error::Result;

/// Heat-bath single-site dynamics on a working graph with the root pinned to `+1`.
#[derive(Clone, Debug)]
pub struct Glauber<'a> {
    g: &'a WeightedGraph,
    root: Option<usize>,
    beta: f64,
    pub state: SpinConfig,
}

impl<'a> Glauber<'a> {
    pub fn new(g: &'a WeightedGraph, root: Option<usize>, beta: f64) -> Self {
        Glauber { g, root, beta, state: SpinConfig::all_plus(g.vertex_count()) }
    }

    #[inline]
    pub fn update(&mut self, v: usize, u: f64) {
        if Some(v) == self.root {
            return;
        }
        let local: f64 = self.g.incident(v).iter().map(|&(e, w)| self.g.edge(e).j * self.state.s[w] as f64).sum();
        let p_plus = 1.0 / (1.0 + (-2.0 * self.beta * local).exp());
        self.state.s[v] = if u < p_plus { 1 } else { -1 };
    }

    /// One pass over all vertices in id order.
    pub fn sweep(&mut self, rng: &mut RngStream) {
        for v in 0..self.g.vertex_count() {
            let u = rng.uniform();
            self.update(v, u);
        }
    }
}

/// Runs `sweeps` heat-bath sweeps from the all-plus state at `(β, h)` and returns the
/// final spins of the working graph.
pub fn glauber_run(vol: &FiniteVolume, p: &ModelParams, bc: Bc, sweeps: usize, rng: &mut RngStream) -> Result<SpinConfig> {
    let fg = FieldGraph::new(&vol.graph, p.h, bc)?;
    let mut ch = Glauber::new(&fg.graph, fg.root, p.beta);
    for _ in 0..sweeps.max(1) {
        ch.sweep(rng);
    }
    Ok(ch.state)
}

/// Single-cluster dynamics on the working graph; clusters reaching the pinned root
/// are rejected and each step is followed by one heat-bath site update.
#[derive(Clone, Debug)]
pub struct Wolff<'a> {
    g: &'a WeightedGraph,
    root: Option<usize>,
    bond: Vec<f64>,
    heat: Glauber<'a>,
    stack: Vec<usize>,
    mark: Vec<u32>,
    epoch: u32,
    /// Vertices other than the root, where clusters are seeded.
    seeds: Vec<usize>,
}

impl<'a> Wolff<'a> {
    pub fn new(g: &'a WeightedGraph, root: Option<usize>, beta: f64) -> Self {
        let bond = g.edges().iter().map(|e| -(-2.0 * beta * e.j).exp_m1()).collect();
        let seeds = (0..g.vertex_count()).filter(|&v| Some(v) != root).collect();
        Wolff {
            g,
            root,
            bond,
            heat: Glauber::new(g, root, beta),
            stack: Vec::new(),
            mark: vec![0; g.vertex_count()],
            epoch: 0,
            seeds,
        }
    }

    pub fn state(&self) -> &SpinConfig {
        &self.heat.state
    }

    /// One cluster move; returns the size of the flipped cluster (0 if rejected).
    pub fn step(&mut self, rng: &mut RngStream) -> usize {
        if self.seeds.is_empty() {
            return 0;
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.epoch = 1;
        }
        let s = &mut self.heat.state.s;
        let seed = self.seeds[rng.below(self.seeds.len())];
        let sign = s[seed];
        let mut cluster = vec![seed];
        self.mark[seed] = self.epoch;
        self.stack.clear();
        self.stack.push(seed);
        let mut hits_root = false;
        while let Some(x) = self.stack.pop() {
            for &(e, y) in self.g.incident(x) {
                if self.mark[y] == self.epoch || s[y] != sign {
                    continue;
                }
                if rng.uniform() < self.bond[e] {
                    self.mark[y] = self.epoch;
                    if Some(y) == self.root {
                        hits_root = true;
                    }
                    cluster.push(y);
                    self.stack.push(y);
                }
            }
        }
        let flipped = if hits_root {
            0
        } else {
            for &v in &cluster {
                s[v] = -s[v];
            }
            cluster.len()
        };
        let v = self.seeds[rng.below(self.seeds.len())];
        let u = rng.uniform();
        self.heat.update(v, u);
        flipped
    }
}

/// Runs `steps` cluster moves from the all-plus state.
pub fn wolff_run(vol: &FiniteVolume, p: &ModelParams, bc: Bc, steps: usize, rng: &mut RngStream) -> Result<SpinConfig> {
    let fg = FieldGraph::new(&vol.graph, p.h, bc)?;
    let mut ch = Wolff::new(&fg.graph, fg.root, p.beta);
    for _ in 0..steps.max(1) {
        ch.step(rng);
    }
    Ok(ch.heat.state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_line_window, Mode};

    #[test]
    fn infinite_temperature_wolff_is_singletons() {
        let vol = build_line_window(4, Mode::Free).unwrap();
        let fg = FieldGraph::natural(&vol.graph, 0.0).unwrap();
        let mut w = Wolff::new(&fg.graph, fg.root, 0.0);
        let mut rng = RngStream::new(1, 0);
        for _ in 0..100 {
            assert_eq!(w.step(&mut rng), 1);
        }
    }

    #[test]
    fn strong_field_saturates() {
        let vol = build_line_window(3, Mode::Free).unwrap();
        let p = ModelParams::ising(1.0, 30.0).unwrap();
        let mut rng = RngStream::new(2, 0);
        let s = glauber_run(&vol, &p, Bc::Free, 10, &mut rng).unwrap();
        assert!(s.s.iter().all(|&x| x == 1));
    }

    #[test]
    fn runs_are_reproducible() {
        let vol = build_line_window(5, Mode::Wired).unwrap();
        let p = ModelParams::ising(0.4, 0.1).unwrap();
        let a = wolff_run(&vol, &p, Bc::Plus, 50, &mut RngStream::new(9, 3)).unwrap();
        let b = wolff_run(&vol, &p, Bc::Plus, 50, &mut RngStream::new(9, 3)).unwrap();
        assert_eq!(a, b);
    }
}
