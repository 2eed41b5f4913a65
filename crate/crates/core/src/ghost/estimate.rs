use super::explore::{explore_cluster, ExplorationTrace};
use crate::error::{invalid, Result};
use crate::graph::{FiniteVolume, WeightedGraph};
use crate::model::PercConfig;
use crate::rng::RngStream;
use crate::samplers::{color_red_white, pire_sample, Environment, FkHeatBath, SwendsenWang, DEFAULT_BURN_IN};
use crate::stats::{batch_means, EstimatorSummary};
use serde::{Deserialize, Serialize};

/// Family of environments for percolation in random environment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum EnvModel {
    /// Constant `p`.
    Bernoulli { p: f64 },
    /// `p_e = (1 − e^{−2βJ_e}) 1(e ∈ E_o(R))` for the red set `R` of a wired
    /// random-cluster sample, with the restricted configuration as `ω`.
    FkRed { q: f64, beta: f64 },
}

impl EnvModel {
    pub fn name(&self) -> &'static str {
        match self {
            EnvModel::Bernoulli { .. } => "bernoulli",
            EnvModel::FkRed { .. } => "fk_red",
        }
    }

    pub fn params(&self) -> (f64, Option<f64>) {
        match *self {
            EnvModel::Bernoulli { p } => (p, None),
            EnvModel::FkRed { q, beta } => (q, Some(beta)),
        }
    }
}

enum Chain<'a> {
    Bernoulli(Environment),
    Sw(SwendsenWang<'a>, f64),
    HeatBath(FkHeatBath<'a>, f64),
}

/// Stream of `(environment, ω)` pairs on a fixed graph.
pub struct EnvSampler<'a> {
    g: &'a WeightedGraph,
    q: f64,
    chain: Chain<'a>,
}

impl<'a> EnvSampler<'a> {
    pub fn new(g: &'a WeightedGraph, model: EnvModel, rng: &mut RngStream) -> Result<Self> {
        let chain = match model {
            EnvModel::Bernoulli { p } => Chain::Bernoulli(Environment::constant(g.edge_count(), p)?),
            EnvModel::FkRed { q, beta } => {
                if !(q >= 1.0) || !(beta >= 0.0) {
                    return invalid("fk_red needs q >= 1 and beta >= 0");
                }
                if q == 2.0 {
                    let mut sw = SwendsenWang::new(g, g.boundary(), beta);
                    for _ in 0..DEFAULT_BURN_IN {
                        sw.step(rng);
                    }
                    Chain::Sw(sw, beta)
                } else {
                    let k: Vec<f64> = g.edges().iter().map(|e| beta * e.j).collect();
                    let mut hb = FkHeatBath::new(g, q, &k)?;
                    for _ in 0..DEFAULT_BURN_IN {
                        hb.sweep(rng);
                    }
                    Chain::HeatBath(hb, beta)
                }
            }
        };
        let q = match model {
            EnvModel::Bernoulli { .. } => 1.0,
            EnvModel::FkRed { q, .. } => q,
        };
        Ok(EnvSampler { g, q, chain })
    }

    pub fn next(&mut self, rng: &mut RngStream) -> Result<(Environment, PercConfig)> {
        let (w, beta) = match &mut self.chain {
            Chain::Bernoulli(env) => return Ok((env.clone(), pire_sample(env, rng))),
            Chain::Sw(sw, beta) => {
                sw.step(rng);
                (sw.bonds.clone(), *beta)
            }
            Chain::HeatBath(hb, beta) => {
                hb.sweep(rng);
                (hb.state.clone(), *beta)
            }
        };
        let rw = color_red_white(self.g, self.g.boundary(), &w, self.q, rng)?;
        let p = self
            .g
            .edges()
            .iter()
            .map(|e| if rw.red[e.u] && rw.red[e.v] { -(-2.0 * beta * e.j).exp_m1() } else { 0.0 })
            .collect();
        Ok((Environment { p }, rw.restricted))
    }
}

/// One line of a ghost scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhostRow {
    /// `two_ghost`, `s_lambda`, `maximal` (sup of `Z²` below `λ`) or `stopped`.
    pub quantity: String,
    pub param: f64,
    pub summary: EstimatorSummary,
    pub bound: f64,
}

impl GhostRow {
    pub fn passes(&self) -> bool {
        self.summary.below(self.bound, 3.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhostScan {
    pub model: EnvModel,
    pub volume: String,
    pub rows: Vec<GhostRow>,
}

pub const GHOST_CSV_HEADER: &str = "model,param1,param2,hg_or_lambda,estimate,stderr,bound,nsamples,seed";

impl GhostScan {
    /// CSV with the model column formatted as `quantity/env/volume`.
    pub fn to_csv(&self) -> String {
        let (p1, p2) = self.model.params();
        let mut out = String::from(GHOST_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{}/{}/{},{},{},{},{},{},{},{},{}\n",
                r.quantity,
                self.model.name(),
                self.volume,
                crate::stats::sig9(p1),
                p2.map(crate::stats::sig9).unwrap_or_default(),
                crate::stats::sig9(r.param),
                crate::stats::sig9(r.summary.mean),
                crate::stats::sig9(r.summary.se),
                crate::stats::sig9(r.bound),
                r.summary.n,
                r.summary.seed
            ));
        }
        out
    }
}

/// `√(p/((1−p)J))`, zero when `p ∈ {0, 1}`.
fn edge_factor(p: f64, j: f64) -> f64 {
    if p > 0.0 && p < 1.0 {
        (p / ((1.0 - p) * j)).sqrt()
    } else {
        0.0
    }
}

/// Weight of `E(K)` restricted to edges that can be green (not touching the boundary).
fn green_weight(g: &WeightedGraph, t: &ExplorationTrace) -> f64 {
    let b = g.boundary();
    t.touched_edges().filter(|&e| Some(g.edge(e).u) != b && Some(g.edge(e).v) != b).map(|e| g.edge(e).j).sum()
}

/// Root edge `η` at `o` drawn proportionally to `J`.
fn root_edge(g: &WeightedGraph, o: usize, rng: &mut RngStream) -> (usize, usize) {
    let inc = g.incident(o);
    let total: f64 = inc.iter().map(|&(e, _)| g.edge(e).j).sum();
    let mut u = rng.uniform() * total;
    for &(e, y) in inc {
        u -= g.edge(e).j;
        if u < 0.0 {
            return (e, y);
        }
    }
    *inc.last().expect("origin has an incident edge")
}

/// Monte Carlo scan of the two-ghost quantities at one environment model.
///
/// For each sample: draw `(p, ω)`, a root edge `η = (o, y)`, explore the clusters of
/// `o` and `y`, and record
/// - `1(𝒯_η) √(p_η/((1−p_η)J_η))` for each ghost intensity, where the green
///   indicator is replaced by its conditional probability given the clusters;
/// - `1(𝒮_{η,λ}) √(p_η/((1−p_η)J_η))` for each `λ`;
/// - `sup{Z_n² : Q_n ≤ λ}` of the exploration of `K_o`, against `4λ`;
/// - `(sup|Z|/Q_T)(1 − e^{−hQ_T}) 1(K_o finite, Q_T > 0)` against `(21/2)√h`.
///
/// A cluster is finite when it avoids the boundary vertex.
pub fn ghost_scan(
    vol: &FiniteVolume,
    model: EnvModel,
    hs: &[f64],
    lambdas: &[f64],
    nsamples: usize,
    rng: &mut RngStream,
) -> Result<GhostScan> {
    if hs.iter().any(|&h| !(h > 0.0)) || lambdas.iter().any(|&l| !(l > 0.0)) {
        return invalid("ghost intensities and lambdas must be positive");
    }
    if nsamples < 2 {
        return invalid("at least two samples are needed");
    }
    let g = &vol.graph;
    let o = vol.origin;
    let b = g.boundary();
    let finite = |t: &ExplorationTrace| b.is_none_or(|b| !t.cluster[b]);
    let mut env_s = EnvSampler::new(g, model, rng)?;
    let mut two = vec![Vec::with_capacity(nsamples); hs.len()];
    let mut slam = vec![Vec::with_capacity(nsamples); lambdas.len()];
    let mut maximal = vec![Vec::with_capacity(nsamples); lambdas.len()];
    let mut stopped = vec![Vec::with_capacity(nsamples); hs.len()];
    for _ in 0..nsamples {
        let (env, w) = env_s.next(rng)?;
        let (eta, y) = root_edge(g, o, rng);
        let ko = explore_cluster(g, &env, &w, o)?;
        let ky = explore_cluster(g, &env, &w, y)?;
        let factor = edge_factor(env.p[eta], g.edge(eta).j);
        let separated = !w.open[eta] && !ko.cluster[y] && (finite(&ko) || finite(&ky));
        let go = green_weight(g, &ko);
        let gy = green_weight(g, &ky);
        // closed edges between the two clusters are counted in both
        let shared: f64 = ko
            .touched_edges()
            .filter(|&e| {
                let ed = g.edge(e);
                (ky.cluster[ed.u] || ky.cluster[ed.v]) && Some(ed.u) != b && Some(ed.v) != b
            })
            .map(|e| g.edge(e).j)
            .sum();
        for (k, &h) in hs.iter().enumerate() {
            let both = if separated {
                1.0 - (-h * go).exp() - (-h * gy).exp() + (-h * (go + gy - shared)).exp()
            } else {
                0.0
            };
            two[k].push(both.max(0.0) * factor);
            let qt = ko.q_final();
            let st = if finite(&ko) && qt > 0.0 { ko.sup_abs() / qt * -(-h * qt).exp_m1() } else { 0.0 };
            stopped[k].push(st);
        }
        for (k, &lam) in lambdas.iter().enumerate() {
            let hit = separated && ko.touched_weight >= lam && ky.touched_weight >= lam;
            slam[k].push(if hit { factor } else { 0.0 });
            maximal[k].push(ko.sup_sq_below(lam));
        }
    }
    let seed = rng.seed();
    let mut rows = Vec::new();
    let summarize = |xs: &[f64]| batch_means(xs, 50, seed);
    for (k, &h) in hs.iter().enumerate() {
        rows.push(GhostRow { quantity: "two_ghost".into(), param: h, summary: summarize(&two[k]), bound: 21.0 * h.sqrt() });
    }
    for (k, &l) in lambdas.iter().enumerate() {
        rows.push(GhostRow { quantity: "s_lambda".into(), param: l, summary: summarize(&slam[k]), bound: 42.0 / l.sqrt() });
    }
    for (k, &l) in lambdas.iter().enumerate() {
        rows.push(GhostRow { quantity: "maximal".into(), param: l, summary: summarize(&maximal[k]), bound: 4.0 * l });
    }
    for (k, &h) in hs.iter().enumerate() {
        rows.push(GhostRow { quantity: "stopped".into(), param: h, summary: summarize(&stopped[k]), bound: 10.5 * h.sqrt() });
    }
    Ok(GhostScan { model, volume: vol.parent.describe(), rows })
}

/// Estimate of `E[1(𝒯_η) √(p_η/((1−p_η)J_η))]` with the bound `21√h`.
pub fn two_ghost_estimate(vol: &FiniteVolume, model: EnvModel, hg: f64, nsamples: usize, rng: &mut RngStream) -> Result<GhostRow> {
    let s = ghost_scan(vol, model, &[hg], &[1.0], nsamples, rng)?;
    Ok(s.rows.into_iter().next().expect("one two-ghost row"))
}

/// Estimate of `E[1(𝒮_{η,λ}) √(p_η/((1−p_η)J_η))]` with the bound `42/√λ`.
pub fn s_lambda_estimate(vol: &FiniteVolume, model: EnvModel, lambda: f64, nsamples: usize, rng: &mut RngStream) -> Result<GhostRow> {
    let s = ghost_scan(vol, model, &[1.0], &[lambda], nsamples, rng)?;
    Ok(s.rows.into_iter().nth(1).expect("one s-lambda row"))
}
