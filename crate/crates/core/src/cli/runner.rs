//! Executes a validated configuration into in-memory CSV outputs.

use super::schema::Validated;
use crate::currents::{gradient_bound_check, QParams, Worm};
use crate::error::{invalid, Result};
use crate::exact::identities::{gradient_identity, working};
use crate::exact::suite::{corpus, gradient_suite, identity_checks, identity_suite, SuiteRow};
use crate::exact::{ising_expectation, loop_distribution, rc_expectation};
use crate::experiments::{betac_locate, magnetization_scan, strip_crossing, BetacModel, Family};
use crate::ghost::{ghost_scan, EnvModel};
use crate::graph::{
    build_line_window, build_torus, build_tree_ball, cycle_graph, path_graph, Bc, FieldGraph, FiniteVolume, Mode,
    WeightedGraph,
};
use crate::model::{ModelParams, PercConfig};
use crate::rng::RngStream;
use crate::samplers::{couplings, FkHeatBath, Glauber, SwendsenWang, Wolff};
use crate::spectral::{
    cluster_covariance_check, loop_gradient_comparison, rho_graph_estimate, rho_tree_estimate, schramm_check, CovSeries,
    COV_CSV_HEADER,
};
use crate::stats::{batch_means, sig9};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Largest working graph on which `sample` also reports exact values.
const EXACT_SAMPLE_VERTICES: usize = 18;

/// A random stream used by a run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub name: String,
    pub seed: u64,
    pub stream: u64,
}

/// Everything a run produces before it touches the file system.
#[derive(Clone, Debug, Default)]
pub struct RunOutput {
    /// `(file name, contents)` in write order.
    pub files: Vec<(String, String)>,
    pub graphs: Vec<(String, String)>,
    pub seeds: Vec<SeedRecord>,
    /// Names of failed runtime assertions.
    pub breaches: Vec<String>,
}

impl RunOutput {
    fn graph(&mut self, name: &str, g: &WeightedGraph) {
        self.graphs.push((name.to_string(), g.hash_hex()));
    }

    fn seed(&mut self, name: &str, seed: u64, stream: u64) {
        self.seeds.push(SeedRecord { name: name.to_string(), seed, stream });
    }

    fn breach(&mut self, name: &str) {
        if !self.breaches.iter().any(|b| b == name) {
            self.breaches.push(name.to_string());
        }
    }
}

fn mode_of(v: &Validated) -> Mode {
    if v.choice("graph", "mode") == "wired" {
        Mode::Wired
    } else {
        Mode::Free
    }
}

/// The configured finite volume and a short name for it.
fn build_volume(v: &Validated) -> Result<(String, FiniteVolume)> {
    let fam = v.choice("graph", "family");
    let wt = || v.float("graph", "weight");
    let n = || v.int("graph", "n");
    let g = match fam {
        "k2" => path_graph(2, wt())?,
        "path" => path_graph(n(), wt())?,
        "cycle" => cycle_graph(n(), wt())?,
        "triangle" => cycle_graph(3, wt())?,
        "square" => cycle_graph(4, wt())?,
        "line" => {
            let m = mode_of(v);
            return Ok((format!("line{}-{}", n(), mode_name(m)), build_line_window(n(), m)?));
        }
        "tree" => {
            let (k, r, m) = (v.int("graph", "k"), v.int("graph", "r"), mode_of(v));
            return Ok((format!("tree{k}-r{r}-{}", mode_name(m)), build_tree_ball(k, r, m)?));
        }
        "torus" => {
            let (d, l) = (v.int("graph", "d"), v.int("graph", "l"));
            return Ok((format!("torus{d}d-L{l}"), FiniteVolume::from_graph(build_torus(d, l, wt())?, "torus", 0)?));
        }
        _ => return v.error("graph", "family", format!("family '{fam}' is not a single graph for this experiment")),
    };
    let name = match fam {
        "path" | "cycle" => format!("{fam}{}", n()),
        _ => fam.to_string(),
    };
    Ok((name.clone(), FiniteVolume::from_graph(g, &name, 0)?))
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Free => "free",
        Mode::Wired => "wired",
    }
}

fn family_of(v: &Validated) -> Result<Family> {
    match v.choice("graph", "family") {
        "tree" => Ok(Family::Tree { k: v.int("graph", "k") }),
        "torus" => Ok(Family::Torus { d: v.int("graph", "d") }),
        f => v.error("graph", "family", format!("this experiment needs family tree or torus, got '{f}'")),
    }
}

fn bc_of(v: &Validated, g: &WeightedGraph) -> Result<Bc> {
    match v.choice("model", "bc") {
        "plus" if g.boundary().is_none() => v.error("model", "bc", "plus boundary condition needs a wired graph"),
        "plus" => Ok(Bc::Plus),
        "free" => Ok(Bc::Free),
        _ => Ok(if g.boundary().is_some() { Bc::Plus } else { Bc::Free }),
    }
}

pub fn execute(v: &Validated) -> Result<RunOutput> {
    let seed = v.int("", "seed") as u64;
    let mut out = RunOutput::default();
    match v.experiment {
        "exact" => run_exact(v, &mut out)?,
        "sample" => run_sample(v, seed, &mut out)?,
        "scan" => run_scan(v, seed, &mut out)?,
        "ghost-test" => run_ghost(v, seed, &mut out)?,
        "current-test" => run_current(v, seed, &mut out)?,
        "spectral" => run_spectral(v, seed, &mut out)?,
        "betac" => run_betac(v, seed, &mut out)?,
        e => unreachable!("validated experiment {e}"),
    }
    Ok(out)
}

fn check_name(choice: &str) -> &str {
    match choice {
        "loop_identity" => "loop_ising",
        c => c,
    }
}

fn run_exact(v: &Validated, out: &mut RunOutput) -> Result<()> {
    let nmax = Some(v.int("run", "nmax") as u32);
    let check = check_name(v.choice("run", "check")).to_string();
    let want = |r: &SuiteRow| check == "all" || r.check.name == check;
    let mut rows: Vec<SuiteRow> = Vec::new();
    if v.choice("graph", "family") == "corpus" {
        for (name, g) in corpus()? {
            out.graph(&name, &g);
        }
        if check != "gradient_identity" {
            rows.extend(identity_suite(nmax)?.into_iter().filter(|r| want(r)));
        }
        if check == "all" || check == "gradient_identity" {
            rows.extend(gradient_suite(nmax)?);
        }
    } else {
        let (name, vol) = build_volume(v)?;
        out.graph(&name, &vol.graph);
        let (beta, h) = (v.float("model", "beta"), v.float("model", "h"));
        if check != "gradient_identity" {
            rows.extend(identity_checks(&name, &vol.graph, beta, h, nmax)?.into_iter().filter(|r| want(r)));
        }
        if check == "all" || check == "gradient_identity" {
            let fg = working(&vol.graph, h)?;
            let m = fg.graph.edge_count();
            if m > 20 {
                return v.error("graph", "family", format!("gradient identity enumerates subgraphs; {m} working edges exceed 20"));
            }
            let all = (1u64 << m) - 1;
            for e in 0..m {
                for drop in (0..m).filter(|&d| d != e) {
                    let c = gradient_identity(&fg.graph, fg.root, all & !(1 << drop), e, beta, nmax)?;
                    rows.push(SuiteRow { graph: format!("{name}-drop{drop}-e{e}"), beta, h, check: c });
                }
            }
        }
    }
    let mut csv = String::from("graph,beta,h,check,residual,bound,pass\n");
    for r in &rows {
        let pass = r.check.passes(1e-9);
        if !pass {
            out.breach(&r.check.name);
        }
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            r.graph,
            sig9(r.beta),
            sig9(r.h),
            r.check.name,
            sig9(r.check.residual),
            sig9(r.check.bound),
            if pass { "PASS" } else { "FAIL" }
        );
    }
    out.files.push(("residuals.csv".into(), csv));
    Ok(())
}

fn run_sample(v: &Validated, seed: u64, out: &mut RunOutput) -> Result<()> {
    let (name, vol) = build_volume(v)?;
    out.graph(&name, &vol.graph);
    let (beta, h, q) = (v.float("model", "beta"), v.float("model", "h"), v.float("model", "q"));
    let sampler = v.choice("run", "sampler");
    let (nsamples, burn) = (v.int("run", "nsamples"), v.int("run", "burn_in"));
    let bc = bc_of(v, &vol.graph)?;
    let mut rng = RngStream::new(seed, 0);
    out.seed("sampler", seed, 0);
    let fg = match sampler {
        "worm" | "fk-heatbath" => FieldGraph::natural(&vol.graph, h)?,
        _ => FieldGraph::new(&vol.graph, h, bc)?,
    };
    let g = &fg.graph;
    let o = vol.origin;
    let small = g.vertex_count() <= EXACT_SAMPLE_VERTICES;
    let m = vol.graph.edge_count().max(1);
    let energy = |s: &[i8]| vol.graph.edges().iter().map(|e| f64::from(s[e.u] * s[e.v])).sum::<f64>() / m as f64;
    // (observable, samples, exact)
    let mut obs: Vec<(&str, Vec<f64>, Option<f64>)> = Vec::new();
    match sampler {
        "sw" | "wolff" | "glauber" => {
            let (mut so, mut en) = (Vec::with_capacity(nsamples), Vec::with_capacity(nsamples));
            let mut record = |s: &[i8]| {
                so.push(f64::from(s[o]));
                en.push(energy(s));
            };
            match sampler {
                "sw" => {
                    let mut ch = SwendsenWang::new(g, fg.root, beta);
                    (0..burn).for_each(|_| ch.step(&mut rng));
                    for _ in 0..nsamples {
                        ch.step(&mut rng);
                        record(&ch.spins.s);
                    }
                }
                "wolff" => {
                    let mut ch = Wolff::new(g, fg.root, beta);
                    (0..burn).for_each(|_| {
                        ch.step(&mut rng);
                    });
                    for _ in 0..nsamples {
                        ch.step(&mut rng);
                        record(&ch.state().s);
                    }
                }
                _ => {
                    let mut ch = Glauber::new(g, fg.root, beta);
                    (0..burn).for_each(|_| ch.sweep(&mut rng));
                    for _ in 0..nsamples {
                        ch.sweep(&mut rng);
                        record(&ch.state.s);
                    }
                }
            }
            let p = ModelParams::ising(beta, h)?;
            let ex = |f: &dyn Fn(&[i8]) -> f64| -> Result<Option<f64>> {
                if small {
                    Ok(Some(ising_expectation(&vol, &p, f, bc)?))
                } else {
                    Ok(None)
                }
            };
            let e_so = ex(&|s: &[i8]| f64::from(s[o]))?;
            let e_en = ex(&|s: &[i8]| energy(s))?;
            obs.push(("sigma_origin", so, e_so));
            obs.push(("edge_energy", en, e_en));
        }
        "worm" => {
            let mut w = Worm::new(g, beta);
            let sweep = 4 * g.edge_count().max(1);
            w.run_closed(burn * sweep / 10, &mut rng);
            let mut frac = Vec::with_capacity(nsamples);
            for _ in 0..nsamples {
                w.run_closed(sweep, &mut rng);
                frac.push(w.bits().iter().filter(|&&b| b).count() as f64 / g.edge_count().max(1) as f64);
            }
            let exact = if small {
                let (lfg, d) = loop_distribution(&vol.graph, &ModelParams::ising(beta, h)?)?;
                let me = lfg.graph.edge_count().max(1) as f64;
                Some(d.masks.iter().zip(&d.probs).map(|(mk, p)| p * f64::from(mk.count_ones()) / me).sum())
            } else {
                None
            };
            obs.push(("loop_edge_fraction", frac, exact));
        }
        _ => {
            let mut ch = FkHeatBath::new(g, q, &couplings(&fg, beta, h))?;
            (0..burn).for_each(|_| ch.sweep(&mut rng));
            let mut frac = Vec::with_capacity(nsamples);
            for _ in 0..nsamples {
                ch.sweep(&mut rng);
                frac.push(ch.state.open_count() as f64 / g.edge_count().max(1) as f64);
            }
            let exact = if small {
                let p = ModelParams::new(beta, h, q)?;
                let me = g.edge_count().max(1) as f64;
                Some(rc_expectation(&vol, &p, |c| c.open.iter().filter(|&&b| b).count() as f64 / me)?)
            } else {
                None
            };
            obs.push(("open_fraction", frac, exact));
        }
    }
    let mut csv = String::from("graph,sampler,beta,h,q,observable,estimate,se,exact,nsamples,seed\n");
    for (name_o, xs, exact) in &obs {
        let s = batch_means(xs, 50, seed);
        let _ = writeln!(
            csv,
            "{name},{sampler},{},{},{},{name_o},{},{},{},{},{seed}",
            sig9(beta),
            sig9(h),
            sig9(q),
            sig9(s.mean),
            sig9(s.se),
            exact.map(sig9).unwrap_or_default(),
            s.n
        );
    }
    out.files.push(("samples.csv".into(), csv));
    Ok(())
}

fn run_scan(v: &Validated, seed: u64, out: &mut RunOutput) -> Result<()> {
    let family = family_of(v)?;
    let sizes = v.ints("run", "sizes");
    let bc = match (v.choice("model", "bc"), family) {
        ("plus", Family::Torus { .. }) => return v.error("model", "bc", "tori have no boundary to pin"),
        ("free", _) | ("natural", Family::Torus { .. }) => Bc::Free,
        _ => Bc::Plus,
    };
    let mode = if bc == Bc::Plus { Mode::Wired } else { Mode::Free };
    for &s in &sizes {
        let vol = family.volume(s, mode)?;
        out.graph(&format!("size{s}"), &vol.graph);
    }
    let grid: Vec<(f64, f64)> =
        v.floats("run", "betas").iter().flat_map(|&b| v.floats("run", "hs").into_iter().map(move |h| (b, h))).collect();
    let table = magnetization_scan(family, bc, &grid, &sizes, v.int("run", "nsamples"), &RngStream::new(seed, 0))?;
    out.seed("scan cells (substream = cell index)", seed, 0);
    out.files.push(("scan.csv".into(), table.to_csv()));
    Ok(())
}

fn run_ghost(v: &Validated, seed: u64, out: &mut RunOutput) -> Result<()> {
    let (name, vol) = build_volume(v)?;
    out.graph(&name, &vol.graph);
    let model = match v.choice("model", "env") {
        "bernoulli" => EnvModel::Bernoulli { p: v.float("model", "p") },
        _ => EnvModel::FkRed { q: v.float("model", "env_q"), beta: v.float("model", "env_beta") },
    };
    let mut rng = RngStream::new(seed, 0);
    out.seed("ghost", seed, 0);
    let scan = ghost_scan(&vol, model, &v.floats("run", "hg"), &v.floats("run", "lambda"), v.int("run", "nsamples"), &mut rng)?;
    for r in &scan.rows {
        if !r.passes() {
            out.breach(&format!("{}_bound", r.quantity));
        }
    }
    out.files.push(("ghost.csv".into(), scan.to_csv()));
    Ok(())
}

fn run_current(v: &Validated, seed: u64, out: &mut RunOutput) -> Result<()> {
    let (name, vol) = build_volume(v)?;
    out.graph(&name, &vol.graph);
    if vol.mode != Mode::Wired {
        return v.error("graph", "mode", "current-test needs a wired volume");
    }
    let f = |k: &str| v.float("model", k);
    let params = match QParams::new(f("beta1"), f("h1"), f("beta2"), f("h2")) {
        Ok(p) => p,
        Err(e) => return v.error("model", "beta2", e.to_string()),
    };
    let mut rng = RngStream::new(seed, 0);
    out.seed("q-pairs", seed, 0);
    let rows = gradient_bound_check(&vol, params, v.int("run", "nsamples"), &mut rng)?;
    let fg = FieldGraph::new(&vol.graph, params.h2, Bc::Plus)?;
    let mut csv = String::from("graph,beta1,h1,beta2,h2,x,element,lhs,event,se,null_se,nsamples,seed,pass\n");
    for r in &rows {
        let ed = fg.graph.edge(r.x);
        let element = if r.x < fg.base_edges() { format!("edge {}-{}", ed.u, ed.v) } else { format!("field {}", ed.u) };
        if !r.passes() {
            out.breach("gradient_bound");
        }
        let _ = writeln!(
            csv,
            "{name},{},{},{},{},{},{element},{},{},{},{},{},{},{}",
            sig9(params.beta1),
            sig9(params.h1),
            sig9(params.beta2),
            sig9(params.h2),
            r.x,
            sig9(r.lhs),
            sig9(r.event.mean),
            sig9(r.event.se),
            sig9(r.null_se()),
            r.event.n,
            r.event.seed,
            if r.passes() { "PASS" } else { "FAIL" }
        );
    }
    out.files.push(("gradient_bound.csv".into(), csv));
    Ok(())
}

fn cov_csv(graph: &str, series: &[(&str, &CovSeries)]) -> String {
    let mut csv = String::from(COV_CSV_HEADER);
    csv.push('\n');
    for (process, s) in series {
        for row in s.to_csv_rows(graph, process, "edge_indicator") {
            csv.push_str(&row);
            csv.push('\n');
        }
    }
    csv
}

fn run_spectral(v: &Validated, seed: u64, out: &mut RunOutput) -> Result<()> {
    let analysis = v.choice("run", "analysis");
    let steps = v.int("run", "steps");
    let nsamples = v.int("run", "nsamples");
    let mut rng = RngStream::new(seed, 0);
    let rho_csv = |est: &crate::spectral::RhoEstimate, target: Option<f64>| {
        let mut csv = String::from("n,rho_2n,target\n");
        for (i, r) in est.sequence.iter().enumerate() {
            let _ = writeln!(csv, "{},{},{}", 2 * (i + 1), sig9(*r), target.map(sig9).unwrap_or_default());
        }
        csv
    };
    match analysis {
        "tree-rho" => {
            if v.choice("graph", "family") != "tree" {
                return v.error("graph", "family", "tree-rho needs family = tree");
            }
            let (k, r) = (v.int("graph", "k"), v.int("graph", "r"));
            let target = 2.0 * ((k - 1) as f64).sqrt() / k as f64;
            let est = rho_tree_estimate(k, r, steps)?;
            out.files.push(("rho.csv".into(), rho_csv(&est, Some(target))));
        }
        "graph-rho" => {
            let (name, vol) = build_volume(v)?;
            out.graph(&name, &vol.graph);
            let est = rho_graph_estimate(&vol.graph, vol.origin, steps)?;
            out.files.push(("rho.csv".into(), rho_csv(&est, None)));
        }
        "schramm" => {
            let (name, vol) = build_volume(v)?;
            out.graph(&name, &vol.graph);
            let rho = if v.choice("graph", "family") == "tree" {
                let k = v.int("graph", "k") as f64;
                2.0 * (k - 1.0).sqrt() / k
            } else {
                rho_graph_estimate(&vol.graph, vol.origin, steps)?.rho_hat
            };
            let p = v.float("model", "p");
            let m = vol.graph.edge_count();
            out.seed("percolation", seed, 0);
            let n = v.int("run", "walk");
            let c = schramm_check(&vol, n, rho, nsamples, |r| Ok(PercConfig { open: (0..m).map(|_| r.bernoulli(p)).collect() }), &mut rng)?;
            if !c.passes() {
                out.breach("schramm_bound");
            }
            let csv = format!(
                "graph,p,n,rho,estimate,se,bound,nsamples,seed,pass\n{name},{},{n},{},{},{},{},{},{seed},{}\n",
                sig9(p),
                sig9(rho),
                sig9(c.estimate.mean),
                sig9(c.estimate.se),
                sig9(c.bound),
                c.estimate.n,
                if c.passes() { "PASS" } else { "FAIL" }
            );
            out.files.push(("schramm.csv".into(), csv));
        }
        _ => {
            if v.choice("graph", "family") != "torus" {
                return v.error("graph", "family", format!("{analysis} needs family = torus"));
            }
            let (name, vol) = build_volume(v)?;
            out.graph(&name, &vol.graph);
            let lags = v.ints("run", "lags");
            if lags.iter().any(|k| k % 2 == 1) {
                return v.error("run", "lags", "lags must be even");
            }
            let beta = v.float("model", "beta");
            if analysis == "cluster-cov" {
                out.seed("swendsen-wang", seed, 0);
                let c = cluster_covariance_check(&vol.graph, beta, v.int("run", "threshold"), &lags, steps, nsamples, &mut rng)?;
                if !c.passes() {
                    out.breach("cluster_covariance_bound");
                }
                out.files.push(("cov.csv".into(), cov_csv(&name, &[("cluster_size_ge_m", &c.series)])));
            } else {
                out.seed("worm", seed, 1);
                out.seed("swendsen-wang", seed, 2);
                let c = loop_gradient_comparison(&vol.graph, beta, &lags, steps, nsamples, &mut rng)?;
                if !c.passes(0.05) {
                    out.breach("loop_gradient_root");
                }
                out.files.push(("cov.csv".into(), cov_csv(&name, &[("loop_o1", &c.loops), ("fk_gradient", &c.gradient)])));
                let csv = format!(
                    "beta,rho_hat,loop_root,gradient_root,pass\n{},{},{},{},{}\n",
                    sig9(beta),
                    sig9(c.rho),
                    sig9(c.loops.root()),
                    sig9(c.gradient.root()),
                    if c.passes(0.05) { "PASS" } else { "FAIL" }
                );
                out.files.push(("roots.csv".into(), csv));
            }
        }
    }
    Ok(())
}

fn run_betac(v: &Validated, seed: u64, out: &mut RunOutput) -> Result<()> {
    let (lo, hi) = (v.float("run", "lo"), v.float("run", "hi"));
    if !(lo < hi) {
        return v.error("run", "hi", "need lo < hi");
    }
    if v.choice("run", "method") == "strip" {
        let w = v.ints("run", "widths");
        if w.len() != 2 || w[0] == w[1] {
            return v.error("run", "widths", "give two distinct strip widths");
        }
        let b = strip_crossing(w[0], w[1], lo, hi)?;
        out.files.push(("betac.csv".into(), format!("method,w1,w2,beta_c\nstrip,{},{},{}\n", w[0], w[1], sig9(b))));
        return Ok(());
    }
    let family = family_of(v)?;
    let q = v.float("model", "q");
    let model = match v.choice("model", "kind") {
        "ising" => BetacModel::Ising,
        "fk-free" => BetacModel::FkFree { q },
        _ => BetacModel::FkWired { q },
    };
    let sizes = v.ints("run", "sizes");
    if sizes.is_empty() {
        return invalid("betac needs at least one size");
    }
    out.seed("betac (substream per size and step)", seed, 0);
    let rep = betac_locate(model, family, &sizes, (lo, hi), v.int("run", "iters"), v.int("run", "nsamples"), &RngStream::new(seed, 0))?;
    let fam = match family {
        Family::Tree { k } => format!("tree{k}"),
        Family::Torus { d } => format!("torus{d}d"),
    };
    let kind = v.choice("model", "kind");
    out.files.push(("betac.csv".into(), format!("model,family,method,beta_c\n{kind},{fam},{},{}\n", rep.method, sig9(rep.beta_c))));
    let mut hist = String::from("step,beta,statistic\n");
    for (i, (b, s)) in rep.history.iter().enumerate() {
        let _ = writeln!(hist, "{i},{},{}", sig9(*b), sig9(*s));
    }
    out.files.push(("betac_history.csv".into(), hist));
    Ok(())
}
