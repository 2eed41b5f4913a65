//! Documented keys of the run configuration and typed, line-precise access.

use super::config::{display_section, Config};
use crate::error::{Error, Result};
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kind {
    Int,
    Float,
    IntList,
    FloatList,
    Choice(&'static [&'static str]),
}

impl Kind {
    fn describe(&self) -> String {
        match self {
            Kind::Int => "integer".into(),
            Kind::Float => "number".into(),
            Kind::IntList => "comma-separated integers".into(),
            Kind::FloatList => "comma-separated numbers".into(),
            Kind::Choice(c) => format!("one of {}", c.join("|")),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct KeyDef {
    pub section: &'static str,
    pub key: &'static str,
    pub kind: Kind,
    /// `None`: required for `experiment`, optional (empty) for list keys elsewhere.
    pub default: Option<&'static str>,
    /// Inclusive bounds on every numeric value.
    pub range: (f64, f64),
    pub experiments: &'static [&'static str],
    pub doc: &'static str,
}

pub const EXPERIMENTS: &[(&str, &str)] = &[
    ("exact", "identity residuals by exact enumeration on one graph or the standard corpus"),
    ("sample", "Monte Carlo estimates from one sampler, with exact values on small graphs"),
    ("scan", "origin magnetization over a (beta, h) grid and several volume sizes"),
    ("ghost-test", "two-ghost quantities against their bounds in a random environment"),
    ("current-test", "gradient bound by the mismatched double current on a wired volume"),
    ("spectral", "return-probability spectral radius and covariance decay checks"),
    ("betac", "critical-point location by Monte Carlo or the strip transfer matrix"),
];

const ALL: &[&str] = &["exact", "sample", "scan", "ghost-test", "current-test", "spectral", "betac"];
const GRAPH_USERS: &[&str] = &["exact", "sample", "scan", "ghost-test", "current-test", "spectral", "betac"];
const INF: f64 = f64::INFINITY;
const NONNEG: (f64, f64) = (0.0, INF);
const POS: (f64, f64) = (f64::MIN_POSITIVE, INF);

fn range_text(r: (f64, f64)) -> String {
    match r {
        POS => "> 0".into(),
        (lo, INF) => format!(">= {lo}"),
        (lo, hi) => format!("in [{lo}, {hi}]"),
    }
}

macro_rules! key {
    ($s:expr, $k:expr, $kind:expr, $def:expr, $range:expr, $exps:expr, $doc:expr) => {
        KeyDef { section: $s, key: $k, kind: $kind, default: $def, range: $range, experiments: $exps, doc: $doc }
    };
}

pub const SCHEMA: &[KeyDef] = &[
    key!("", "experiment", Kind::Choice(&["exact", "sample", "scan", "ghost-test", "current-test", "spectral", "betac"]), None, NONNEG, ALL, "experiment to run"),
    key!("", "seed", Kind::Int, Some("1"), NONNEG, ALL, "root seed of every random stream"),
    key!("graph", "family", Kind::Choice(&["k2", "path", "cycle", "triangle", "square", "line", "tree", "torus", "corpus"]), Some("tree"), NONNEG, GRAPH_USERS, "graph family; scan and betac accept tree|torus, corpus is exact-only"),
    key!("graph", "n", Kind::Int, Some("4"), (2.0, 64.0), &["exact", "sample", "ghost-test", "current-test", "spectral"], "vertex count of path, cycle or line"),
    key!("graph", "k", Kind::Int, Some("3"), (3.0, 16.0), GRAPH_USERS, "tree degree"),
    key!("graph", "r", Kind::Int, Some("2"), (1.0, 64.0), &["exact", "sample", "ghost-test", "current-test", "spectral"], "tree ball radius"),
    key!("graph", "d", Kind::Int, Some("2"), (1.0, 4.0), GRAPH_USERS, "torus dimension"),
    key!("graph", "l", Kind::Int, Some("8"), (2.0, 4096.0), &["exact", "sample", "ghost-test", "spectral"], "torus side length"),
    key!("graph", "mode", Kind::Choice(&["free", "wired"]), Some("wired"), NONNEG, &["exact", "sample", "ghost-test", "current-test", "spectral"], "boundary of tree balls and line windows"),
    key!("graph", "weight", Kind::Float, Some("1"), POS, &["exact", "sample", "ghost-test", "spectral"], "coupling J of k2, path, cycle, triangle, square and torus"),
    key!("model", "beta", Kind::Float, Some("0.5"), NONNEG, &["exact", "sample", "spectral"], "inverse temperature"),
    key!("model", "h", Kind::Float, Some("0"), NONNEG, &["exact", "sample"], "external field"),
    key!("model", "q", Kind::Float, Some("2"), POS, &["sample", "betac"], "random-cluster weight"),
    key!("model", "bc", Kind::Choice(&["natural", "plus", "free"]), Some("natural"), NONNEG, &["sample", "scan"], "spin boundary condition; natural is plus iff the graph has a boundary"),
    key!("model", "env", Kind::Choice(&["bernoulli", "fk-red"]), Some("bernoulli"), NONNEG, &["ghost-test"], "random environment"),
    key!("model", "p", Kind::Float, Some("0.5"), (0.0, 1.0), &["ghost-test", "spectral"], "Bernoulli edge probability"),
    key!("model", "env_beta", Kind::Float, Some("0.4"), NONNEG, &["ghost-test"], "inverse temperature of the fk-red environment"),
    key!("model", "env_q", Kind::Float, Some("2"), POS, &["ghost-test"], "cluster weight of the fk-red environment"),
    key!("model", "beta1", Kind::Float, Some("0.3"), NONNEG, &["current-test"], "lower inverse temperature"),
    key!("model", "h1", Kind::Float, Some("0.1"), NONNEG, &["current-test"], "lower field"),
    key!("model", "beta2", Kind::Float, Some("0.6"), NONNEG, &["current-test"], "upper inverse temperature"),
    key!("model", "h2", Kind::Float, Some("0.3"), NONNEG, &["current-test"], "upper field"),
    key!("model", "kind", Kind::Choice(&["ising", "fk-free", "fk-wired"]), Some("ising"), NONNEG, &["betac"], "model whose critical point is located"),
    key!("run", "check", Kind::Choice(&["all", "loop_identity", "fk_gradient", "phisigma", "es_cylinder", "first_random_current", "switching", "double_current_connection", "gradient_identity"]), Some("all"), NONNEG, &["exact"], "identity to evaluate"),
    key!("run", "nmax", Kind::Int, Some("14"), (1.0, 64.0), &["exact"], "per-edge current truncation"),
    key!("run", "sampler", Kind::Choice(&["sw", "wolff", "glauber", "worm", "fk-heatbath"]), Some("sw"), NONNEG, &["sample"], "Markov chain"),
    key!("run", "nsamples", Kind::Int, Some("10000"), (100.0, 1e9), &["sample", "scan", "ghost-test", "current-test", "spectral", "betac"], "samples per estimate"),
    key!("run", "burn_in", Kind::Int, Some("1000"), (0.0, 1e9), &["sample"], "discarded initial steps"),
    key!("run", "hg", Kind::FloatList, Some("0.001, 0.01, 0.1"), POS, &["ghost-test"], "ghost intensities"),
    key!("run", "lambda", Kind::FloatList, None, POS, &["ghost-test"], "thresholds of the S_lambda and maximal quantities"),
    key!("run", "betas", Kind::FloatList, Some("0.3, 0.4, 0.5, 0.6"), NONNEG, &["scan"], "inverse temperatures of the grid"),
    key!("run", "hs", Kind::FloatList, Some("0"), NONNEG, &["scan"], "fields of the grid"),
    key!("run", "sizes", Kind::IntList, Some("4, 6"), (2.0, 4096.0), &["scan", "betac"], "ball radii (tree) or side lengths (torus)"),
    key!("run", "analysis", Kind::Choice(&["tree-rho", "graph-rho", "schramm", "cluster-cov", "loop-gradient"]), Some("tree-rho"), NONNEG, &["spectral"], "spectral analysis"),
    key!("run", "steps", Kind::Int, Some("200"), (2.0, 1e6), &["spectral"], "walk steps for return probabilities"),
    key!("run", "walk", Kind::Int, Some("6"), (0.0, 1e4), &["spectral"], "walk length n of the connection bound"),
    key!("run", "lags", Kind::IntList, Some("0, 2, 4, 6, 8"), (0.0, 1e4), &["spectral"], "even walk lags of the covariance series"),
    key!("run", "threshold", Kind::Int, Some("10"), (1.0, 1e9), &["spectral"], "cluster-size threshold m"),
    key!("run", "method", Kind::Choice(&["mc", "strip"]), Some("mc"), NONNEG, &["betac"], "Monte Carlo location or strip transfer-matrix crossing"),
    key!("run", "lo", Kind::Float, Some("0.4"), NONNEG, &["betac"], "lower end of the search bracket"),
    key!("run", "hi", Kind::Float, Some("0.48"), NONNEG, &["betac"], "upper end of the search bracket"),
    key!("run", "iters", Kind::Int, Some("8"), (1.0, 64.0), &["betac"], "bisection steps or extrapolation grid size"),
    key!("run", "widths", Kind::IntList, Some("7, 8"), (2.0, 12.0), &["betac"], "two strip widths for the transfer-matrix crossing"),
];

fn lookup(section: &str, key: &str) -> Option<&'static KeyDef> {
    SCHEMA.iter().find(|d| d.section == section && d.key == key)
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Config { line, msg: msg.into() })
}

/// Human-readable schema printed by `print-schema`.
pub fn schema_text() -> String {
    let mut s = String::from("# graphrep run configuration\n#\n# Flat 'key = value' lines grouped under [section] headers; '#' or ';'\n# starts a whole-line comment. Top-level keys come before any header.\n#\n# experiments:\n");
    for (e, d) in EXPERIMENTS {
        let _ = writeln!(s, "#   {e:<13} {d}");
    }
    let mut last = None;
    for d in SCHEMA {
        if last != Some(d.section) {
            let _ = writeln!(s, "\n{}", if d.section.is_empty() { "# (top level)".to_string() } else { format!("[{}]", d.section) });
            last = Some(d.section);
        }
        let def = match (d.default, d.kind) {
            (Some(v), _) => format!("default {v}"),
            (None, Kind::IntList | Kind::FloatList) => "default empty".into(),
            (None, _) => "required".into(),
        };
        let range = match d.kind {
            Kind::Choice(_) => String::new(),
            _ => format!(", {}", range_text(d.range)),
        };
        let _ = writeln!(s, "# {}: {}{range}; {def}; used by {}\n# {}", d.key, d.kind.describe(), d.experiments.join(","), d.doc);
    }
    s
}

fn check_number(d: &KeyDef, line: usize, x: f64) -> Result<()> {
    if !x.is_finite() || x < d.range.0 || x > d.range.1 {
        return err(line, format!("{} = {x} must be {}", d.key, range_text(d.range)));
    }
    Ok(())
}

fn check_value(d: &KeyDef, line: usize, v: &str) -> Result<()> {
    match d.kind {
        Kind::Int => {
            let x: u64 = v.parse().map_err(|_| Error::Config { line, msg: format!("{} expects an integer, got '{v}'", d.key) })?;
            check_number(d, line, x as f64)
        }
        Kind::Float => {
            let x: f64 = v.parse().map_err(|_| Error::Config { line, msg: format!("{} expects a number, got '{v}'", d.key) })?;
            check_number(d, line, x)
        }
        Kind::IntList | Kind::FloatList => {
            for item in v.split(',').map(str::trim) {
                let x = if d.kind == Kind::IntList {
                    item.parse::<u64>().map(|x| x as f64).ok()
                } else {
                    item.parse::<f64>().ok()
                };
                let Some(x) = x else {
                    return err(line, format!("{} expects {}, got '{item}'", d.key, d.kind.describe()));
                };
                check_number(d, line, x)?;
            }
            Ok(())
        }
        Kind::Choice(c) => {
            if c.contains(&v) {
                Ok(())
            } else {
                err(line, format!("{} must be one of {}, got '{v}'", d.key, c.join("|")))
            }
        }
    }
}

/// A configuration that passed schema validation for one experiment.
#[derive(Clone, Debug)]
pub struct Validated {
    pub config: Config,
    pub experiment: &'static str,
}

pub fn validate(cfg: &Config) -> Result<Validated> {
    let Some(exp) = cfg.get("", "experiment") else {
        return err(1, "missing required top-level key 'experiment'");
    };
    let def = lookup("", "experiment").expect("experiment key");
    check_value(def, cfg.line_of("", "experiment"), exp)?;
    let experiment = ALL.iter().copied().find(|&e| e == exp).expect("checked choice");
    for (section, key, value, line) in cfg.entries() {
        let Some(d) = lookup(section, key) else {
            return err(line, format!("unknown key '{key}' in {}", display_section(section)));
        };
        if !d.experiments.contains(&experiment) {
            return err(line, format!("key '{key}' is not used by experiment '{experiment}'"));
        }
        check_value(d, line, value)?;
    }
    for section in cfg.section_names() {
        if !section.is_empty() && !SCHEMA.iter().any(|d| d.section == section) {
            return err(cfg.section_line(section), format!("unknown section [{section}]"));
        }
    }
    Ok(Validated { config: cfg.clone(), experiment })
}

impl Validated {
    fn def(&self, section: &str, key: &str) -> &'static KeyDef {
        let d = lookup(section, key).unwrap_or_else(|| panic!("schema lacks {section}.{key}"));
        debug_assert!(d.experiments.contains(&self.experiment), "{section}.{key} read by {}", self.experiment);
        d
    }

    fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.config.get(section, key).or(self.def(section, key).default)
    }

    /// Source line of a key, or of its section header when the key was defaulted.
    pub fn line(&self, section: &str, key: &str) -> usize {
        match self.config.line_of(section, key) {
            0 => self.config.section_line(section),
            l => l,
        }
    }

    pub fn int(&self, section: &str, key: &str) -> usize {
        self.raw(section, key).and_then(|v| v.parse().ok()).expect("validated integer")
    }

    pub fn float(&self, section: &str, key: &str) -> f64 {
        self.raw(section, key).and_then(|v| v.parse().ok()).expect("validated number")
    }

    pub fn ints(&self, section: &str, key: &str) -> Vec<usize> {
        self.raw(section, key).map(|v| v.split(',').map(|x| x.trim().parse().expect("validated")).collect()).unwrap_or_default()
    }

    pub fn floats(&self, section: &str, key: &str) -> Vec<f64> {
        self.raw(section, key).map(|v| v.split(',').map(|x| x.trim().parse().expect("validated")).collect()).unwrap_or_default()
    }

    pub fn choice(&self, section: &str, key: &str) -> &str {
        self.raw(section, key).expect("choice keys have defaults")
    }

    /// A config error pinned to the line of `section.key`.
    pub fn error<T>(&self, section: &str, key: &str, msg: impl Into<String>) -> Result<T> {
        err(self.line(section, key), msg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_of_error(text: &str) -> usize {
        match validate(&Config::parse(text).unwrap()) {
            Err(Error::Config { line, .. }) => line,
            other => panic!("{text:?} gave {other:?}"),
        }
    }

    #[test]
    fn defaults_and_types() {
        let v = validate(&Config::parse("experiment = ghost-test\n[model]\np = 0.25\n").unwrap()).unwrap();
        assert_eq!(v.float("model", "p"), 0.25);
        assert_eq!(v.floats("run", "hg"), vec![0.001, 0.01, 0.1]);
        assert!(v.floats("run", "lambda").is_empty());
        assert_eq!(v.choice("graph", "family"), "tree");
    }

    #[test]
    fn schema_errors_point_at_lines() {
        assert_eq!(line_of_error("seed = 3\n"), 1);
        assert_eq!(line_of_error("experiment = nope\n"), 1);
        assert_eq!(line_of_error("experiment = exact\n[graph]\nfamily = tree\nr = two\n"), 4);
        assert_eq!(line_of_error("experiment = exact\n[model]\nbogus = 1\n"), 3);
        assert_eq!(line_of_error("experiment = exact\n[run]\nhg = 0.1\n"), 3);
        assert_eq!(line_of_error("experiment = ghost-test\n[model]\np = 1.5\n"), 3);
        assert_eq!(line_of_error("experiment = scan\n[run]\nsizes = 4, x\n"), 3);
        assert_eq!(line_of_error("experiment = exact\n\n[extra]\n"), 3);
    }

    #[test]
    fn every_default_validates() {
        for d in SCHEMA {
            if let Some(v) = d.default {
                check_value(d, 0, v).unwrap_or_else(|e| panic!("{}: {e}", d.key));
            }
        }
        assert!(schema_text().contains("experiment: one of"));
    }
}
