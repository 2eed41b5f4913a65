use crate::error::{invalid, Result};
use crate::graph::WeightedGraph;
use crate::model::PercConfig;
use crate::rng::RngStream;
use crate::unionfind::UnionFind;

/// Open probabilities per working-graph edge.
#[derive(Clone, Debug, PartialEq)]
pub struct Environment {
    pub p: Vec<f64>,
}

impl Environment {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return invalid("environment probabilities must lie in [0, 1]");
        }
        Ok(Environment { p })
    }

    pub fn constant(m: usize, p: f64) -> Result<Self> {
        Environment::new(vec![p; m])
    }
}

/// Independent bits `ω(e) = 1(U_e ≤ p_e)`.
pub fn pire_sample(env: &Environment, rng: &mut RngStream) -> PercConfig {
    PercConfig { open: env.p.iter().map(|&p| rng.uniform() < p).collect() }
}

/// Red vertex set and the configuration restricted to red-red edges.
#[derive(Clone, Debug)]
pub struct RedWhite {
    pub red: Vec<bool>,
    pub restricted: PercConfig,
}

/// Colours clusters red with probability `1/q`; the root cluster (boundary and open
/// vertices) is always red.
pub fn color_red_white(g: &WeightedGraph, root: Option<usize>, w: &PercConfig, q: f64, rng: &mut RngStream) -> Result<RedWhite> {
    if !(q >= 1.0) {
        return invalid("q must be at least 1");
    }
    let mut uf = UnionFind::new(g.vertex_count());
    for (e, ed) in g.edges().iter().enumerate() {
        if w.open[e] {
            uf.union(ed.u, ed.v);
        }
    }
    let (label, k) = uf.labels();
    let mut cred: Vec<bool> = (0..k).map(|_| rng.uniform() < 1.0 / q).collect();
    if let Some(r) = root {
        cred[label[r] as usize] = true;
    }
    let red: Vec<bool> = label.iter().map(|&l| cred[l as usize]).collect();
    let open = g.edges().iter().enumerate().map(|(e, ed)| w.open[e] && red[ed.u] && red[ed.v]).collect();
    Ok(RedWhite { red, restricted: PercConfig { open } })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_one_is_all_red() {
        let g = crate::graph::cycle_graph(4, 1.0).unwrap();
        let mut rng = RngStream::new(1, 1);
        let w = PercConfig { open: vec![true, false, true, false] };
        let rw = color_red_white(&g, None, &w, 1.0, &mut rng).unwrap();
        assert!(rw.red.iter().all(|&r| r));
        assert_eq!(rw.restricted, w);
    }

    #[test]
    fn extreme_environments() {
        let mut rng = RngStream::new(2, 0);
        assert!(pire_sample(&Environment::constant(5, 1.0).unwrap(), &mut rng).open.iter().all(|&b| b));
        assert_eq!(pire_sample(&Environment::constant(5, 0.0).unwrap(), &mut rng).open_count(), 0);
        assert!(Environment::new(vec![1.5]).is_err());
    }
}
