//! Residuals of the exact finite-volume identities between representations.
//!
//! Every check takes a working graph `w` (field already turned into edges), the
//! optional pinned root and `β`. Element sets are edge masks of `w`; each identity
//! is computed through two independent engines and the returned [`Check`] carries
//! the largest discrepancy together with the rigorous truncation bound.

use super::current::{double_tail_bound, ratio_bound, support_table, SUPPORT_MAX_EDGES};
use super::fk::rc_sums;
use super::loops::loop_distribution_on;
use super::spins::spin_sums;
use crate::error::{invalid, Error, Result};
use crate::graph::{FieldGraph, WeightedGraph};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    /// Truncation allowance (zero when both sides are computed without truncation).
    pub bound: f64,
}

impl Check {
    fn new(name: &str, residual: f64, bound: f64) -> Self {
        Check { name: name.to_string(), residual, bound }
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.residual <= tol + self.bound
    }

    /// Combine by taking the worst residual and the matching bound.
    pub fn worst(checks: impl IntoIterator<Item = Check>, name: &str) -> Check {
        let mut out = Check::new(name, 0.0, 0.0);
        let mut slack = f64::NEG_INFINITY;
        for c in checks {
            let s = c.residual - c.bound;
            if s > slack {
                slack = s;
                out.residual = c.residual;
                out.bound = c.bound;
            }
        }
        out
    }
}

fn mask_iter(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            return None;
        }
        let i = mask.trailing_zeros() as usize;
        mask &= mask - 1;
        Some(i)
    })
}

fn edge_signs<'a>(w: &'a WeightedGraph, s: &'a [i8]) -> impl Iterator<Item = i8> + 'a {
    w.edges().iter().map(move |e| s[e.u] * s[e.v])
}

/// Loop O(1) closed-set probabilities against the gradient Ising expression
/// `∏ cosh(βJ_x) · G[exp(−β Σ_{x∈A} J_x σ_x)]`; relative residual.
pub fn loop_ising(w: &WeightedGraph, root: Option<usize>, beta: f64, sets: &[u64]) -> Result<Check> {
    let ld = loop_distribution_on(w, beta)?;
    let plus: Vec<f64> = w.edges().iter().map(|e| (-beta * e.j).exp()).collect();
    let minus: Vec<f64> = w.edges().iter().map(|e| (beta * e.j).exp()).collect();
    let g = spin_sums(w, root, beta, sets.len(), |s, out| {
        let sg: Vec<i8> = edge_signs(w, s).collect();
        for (o, &a) in out.iter_mut().zip(sets) {
            *o = mask_iter(a).map(|x| if sg[x] > 0 { plus[x] } else { minus[x] }).product();
        }
    })?;
    let mut worst = 0.0f64;
    for (k, &a) in sets.iter().enumerate() {
        let c: f64 = mask_iter(a).map(|x| (beta * w.edge(x).j).cosh()).product();
        let rhs = c * g[k];
        let lhs = ld.prob_closed_on(a);
        worst = worst.max((lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE));
    }
    Ok(Check::new("loop_ising", worst, 0.0))
}

/// FK-Ising closed-set probabilities against `G[exp(−β Σ_{x∈A} J_x (σ_x + 1))]`.
pub fn fk_gradient(w: &WeightedGraph, root: Option<usize>, beta: f64, sets: &[u64]) -> Result<Check> {
    let fk = rc_sums(w, root, 2.0, beta, sets.len(), |c, out| {
        for (o, &a) in out.iter_mut().zip(sets) {
            *o = f64::from(u8::from(mask_iter(a).all(|x| !c.open[x])));
        }
    })?;
    let plus: Vec<f64> = w.edges().iter().map(|e| (-2.0 * beta * e.j).exp()).collect();
    let g = spin_sums(w, root, beta, sets.len(), |s, out| {
        let sg: Vec<i8> = edge_signs(w, s).collect();
        for (o, &a) in out.iter_mut().zip(sets) {
            *o = mask_iter(a).map(|x| if sg[x] > 0 { plus[x] } else { 1.0 }).product();
        }
    })?;
    let worst = fk
        .iter()
        .zip(&g)
        .map(|(a, b)| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    Ok(Check::new("fk_gradient", worst, 0.0))
}

/// `φ₂(ω(x)=1) = 1 − e^{−a} cosh a + e^{−a} sinh a ⟨σ_x⟩` with `a = βJ_x`, every element.
pub fn phisigma(w: &WeightedGraph, root: Option<usize>, beta: f64) -> Result<Check> {
    let m = w.edge_count();
    let fk = rc_sums(w, root, 2.0, beta, m, |c, out| {
        for (o, &b) in out.iter_mut().zip(c.open) {
            *o = f64::from(u8::from(b));
        }
    })?;
    let sig = spin_sums(w, root, beta, m, |s, out| {
        for (o, sg) in out.iter_mut().zip(edge_signs(w, s)) {
            *o = sg as f64;
        }
    })?;
    let mut worst = 0.0f64;
    for x in 0..m {
        let a = beta * w.edge(x).j;
        let formula = 1.0 - (-a).exp() * a.cosh() + (-a).exp() * a.sinh() * sig[x];
        worst = worst.max((fk[x] - formula).abs());
    }
    Ok(Check::new("phisigma", worst, 0.0))
}

/// `I(σ ≡ +1 on A) = φ₂[2^{−#finite clusters meeting A}]`, clusters of the root being
/// infinite.
pub fn es_cylinder(w: &WeightedGraph, root: Option<usize>, beta: f64, sets: &[Vec<usize>]) -> Result<Check> {
    let fk = rc_sums(w, root, 2.0, beta, sets.len(), |c, out| {
        for (o, a) in out.iter_mut().zip(sets) {
            *o = 0.5f64.powi(c.finite_clusters_meeting(a) as i32);
        }
    })?;
    let sp = spin_sums(w, root, beta, sets.len(), |s, out| {
        for (o, a) in out.iter_mut().zip(sets) {
            *o = f64::from(u8::from(a.iter().all(|&v| s[v] > 0)));
        }
    })?;
    let worst = fk.iter().zip(&sp).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(Check::new("es_cylinder", worst, 0.0))
}

fn all_edges(w: &WeightedGraph) -> u64 {
    if w.edge_count() == 64 {
        u64::MAX
    } else {
        (1u64 << w.edge_count()) - 1
    }
}

fn guard_support(w: &WeightedGraph) -> Result<()> {
    if w.edge_count() > SUPPORT_MAX_EDGES {
        return Err(Error::SizeGuard(format!("{} working edges exceed the support-table limit", w.edge_count())));
    }
    Ok(())
}

fn activities(w: &WeightedGraph, mask: u64, beta: f64) -> Vec<f64> {
    mask_iter(mask).map(|e| beta * w.edge(e).j).collect()
}

/// `⟨σ_x σ_y⟩ = Z_{{x,y}} / Z_∅` against spin enumeration for each pair.
pub fn first_random_current(
    w: &WeightedGraph,
    root: Option<usize>,
    beta: f64,
    pairs: &[(usize, usize)],
    nmax: Option<u32>,
) -> Result<Check> {
    guard_support(w)?;
    let all = all_edges(w);
    let z0: f64 = support_table(w, all, beta, nmax, &[], None)?.iter().sum();
    let b = double_tail_bound(&activities(w, all, beta), &[], nmax);
    let sp = spin_sums(w, root, beta, pairs.len(), |s, out| {
        for (o, &(x, y)) in out.iter_mut().zip(pairs) {
            *o = (s[x] * s[y]) as f64;
        }
    })?;
    let mut checks = Vec::new();
    for (k, &(x, y)) in pairs.iter().enumerate() {
        let zxy: f64 = support_table(w, all, beta, nmax, &[x, y], None)?.iter().sum();
        let bound = ratio_bound(b, b, zxy, z0);
        checks.push(Check::new("first_random_current", (zxy / z0 - sp[k]).abs(), bound));
    }
    Ok(Check::worst(checks, "first_random_current"))
}

/// Vertex set reachable from `x` through the edges of `mask`.
pub fn reach(w: &WeightedGraph, mask: u64, x: usize) -> u64 {
    let mut r = 1u64 << x;
    loop {
        let mut next = r;
        for e in mask_iter(mask) {
            let ed = w.edge(e);
            if next >> ed.u & 1 == 1 || next >> ed.v & 1 == 1 {
                next |= (1u64 << ed.u) | (1u64 << ed.v);
            }
        }
        if next == r {
            return r;
        }
        r = next;
    }
}

pub fn connected_via(w: &WeightedGraph, mask: u64, x: usize, y: usize) -> bool {
    x == y || reach(w, mask, x) >> y & 1 == 1
}

/// `c[U] = Σ_{S ∪ T = U} a[S] b[T]` by subset-sum and Möbius transforms.
pub fn or_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    assert_eq!(n, b.len());
    assert!(n.is_power_of_two());
    let zeta = |v: &mut Vec<f64>| {
        let mut bit = 1;
        while bit < n {
            for s in 0..n {
                if s & bit != 0 {
                    v[s] += v[s ^ bit];
                }
            }
            bit <<= 1;
        }
    };
    let (mut za, mut zb) = (a.to_vec(), b.to_vec());
    zeta(&mut za);
    zeta(&mut zb);
    let mut c: Vec<f64> = za.iter().zip(&zb).map(|(x, y)| x * y).collect();
    let mut bit = 1;
    while bit < n {
        for s in 0..n {
            if s & bit != 0 {
                c[s] -= c[s ^ bit];
            }
        }
        bit <<= 1;
    }
    c
}

fn check_subgraph(w: &WeightedGraph, h_mask: u64, vs: &[usize]) -> Result<()> {
    if h_mask & !all_edges(w) != 0 {
        return invalid("subgraph mask names edges outside the graph");
    }
    for &v in vs {
        if v >= w.vertex_count() {
            return invalid(format!("vertex {v} is not in the subgraph"));
        }
    }
    Ok(())
}

fn sym_diff(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = a.iter().filter(|v| !b.contains(v)).chain(b.iter().filter(|v| !a.contains(v))).copied().collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Switching lemma with `n₁` on the subgraph `h_mask` and `n₂` on `w`, for an
/// observable `f` of the support of `n₁ + n₂` bounded by `1`. Both sides are scaled
/// by `Z_H(∅) Z_G(∅)`.
pub fn switching<F>(
    w: &WeightedGraph,
    h_mask: u64,
    x: usize,
    y: usize,
    a: &[usize],
    beta: f64,
    nmax: Option<u32>,
    f: F,
) -> Result<Check>
where
    F: Fn(u64) -> f64,
{
    guard_support(w)?;
    check_subgraph(w, h_mask, &[x, y])?;
    let all = all_edges(w);
    let h_xy = support_table(w, h_mask, beta, nmax, &[x, y], None)?;
    let g_a = support_table(w, all, beta, nmax, a, None)?;
    let h_0 = support_table(w, h_mask, beta, nmax, &[], None)?;
    let g_ax = support_table(w, all, beta, nmax, &sym_diff(a, &[x, y]), None)?;
    let lhs_c = or_convolve(&h_xy, &g_a);
    let rhs_c = or_convolve(&h_0, &g_ax);
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for u in 0..lhs_c.len() {
        let fu = f(u as u64);
        lhs += fu * lhs_c[u];
        if rhs_c[u] != 0.0 && connected_via(w, u as u64 & h_mask, x, y) {
            rhs += fu * rhs_c[u];
        }
    }
    let zh: f64 = h_0.iter().sum();
    let zg: f64 = support_table(w, all, beta, nmax, &[], None)?.iter().sum();
    let scale = zh * zg;
    let bound = double_tail_bound(&activities(w, h_mask, beta), &activities(w, all, beta), nmax) / scale;
    Ok(Check::new("switching", (lhs - rhs).abs() / scale, bound))
}

/// `⟨σ_x σ_y⟩_H ⟨σ_x σ_y⟩_G = C_H ⊗ C_G(x ↔ y in H through n₁ + n₂)`.
pub fn double_current_connection(
    w: &WeightedGraph,
    root: Option<usize>,
    h_mask: u64,
    x: usize,
    y: usize,
    beta: f64,
    nmax: Option<u32>,
) -> Result<Check> {
    guard_support(w)?;
    check_subgraph(w, h_mask, &[x, y])?;
    let all = all_edges(w);
    let keep: Vec<bool> = (0..w.edge_count()).map(|e| h_mask >> e & 1 == 1).collect();
    let (hg, _) = w.edge_subgraph(&keep);
    let two = |g: &WeightedGraph| -> Result<f64> { Ok(spin_sums(g, root, beta, 1, |s, o| o[0] = (s[x] * s[y]) as f64)?[0]) };
    let lhs = two(&hg)? * two(w)?;
    let h_0 = support_table(w, h_mask, beta, nmax, &[], None)?;
    let g_0 = support_table(w, all, beta, nmax, &[], None)?;
    let c = or_convolve(&h_0, &g_0);
    let mut num = 0.0;
    for (u, &cu) in c.iter().enumerate() {
        if cu != 0.0 && connected_via(w, u as u64 & h_mask, x, y) {
            num += cu;
        }
    }
    let den: f64 = h_0.iter().sum::<f64>() * g_0.iter().sum::<f64>();
    let b = double_tail_bound(&activities(w, h_mask, beta), &activities(w, all, beta), nmax);
    Ok(Check::new("double_current_connection", (num / den - lhs).abs(), ratio_bound(b, b, num, den)))
}

/// Finite-volume gradient identity
/// `βJ_e(⟨σ_e⟩_G − ⟨σ_e⟩_H) = C_H ⊗ C_G(ℬ_e)` for an edge `e` of the subgraph.
pub fn gradient_identity(w: &WeightedGraph, root: Option<usize>, h_mask: u64, e: usize, beta: f64, nmax: Option<u32>) -> Result<Check> {
    guard_support(w)?;
    if e >= w.edge_count() || h_mask >> e & 1 == 0 {
        return invalid("edge is not in the subgraph");
    }
    let all = all_edges(w);
    let (x, y) = (w.edge(e).u, w.edge(e).v);
    let keep: Vec<bool> = (0..w.edge_count()).map(|k| h_mask >> k & 1 == 1).collect();
    let (hg, ids) = w.edge_subgraph(&keep);
    let he = ids.iter().position(|&k| k == e).expect("edge kept");
    let sg = spin_sums(w, root, beta, 1, |s, o| o[0] = (s[x] * s[y]) as f64)?[0];
    let sh = spin_sums(&hg, root, beta, 1, |s, o| o[0] = (s[hg.edge(he).u] * s[hg.edge(he).v]) as f64)?[0];
    let lhs = beta * w.edge(e).j * (sg - sh);
    let bit = 1u64 << e;
    let h_0 = support_table(w, h_mask & !bit, beta, nmax, &[], None)?;
    let g_1 = support_table(w, all, beta, nmax, &[], Some(e))?;
    let c = or_convolve(&h_0, &g_1);
    let mut num = 0.0;
    for (u, &cu) in c.iter().enumerate() {
        let u = u as u64 & !bit;
        if cu != 0.0 && connected_via(w, u, x, y) && !connected_via(w, u & h_mask, x, y) {
            num += cu;
        }
    }
    let zh: f64 = support_table(w, h_mask, beta, nmax, &[], None)?.iter().sum();
    let zg: f64 = support_table(w, all, beta, nmax, &[], None)?.iter().sum();
    let den = zh * zg;
    let b = double_tail_bound(&activities(w, h_mask, beta), &activities(w, all, beta), nmax);
    Ok(Check::new("gradient_identity", (num / den - lhs).abs(), ratio_bound(b, b, num, den)))
}

/// The chain `L(x open) ≤ C(n_x > 0) ≤ φ₂(x open) ≤ 1 − e^{−2βJ_x} ≤ 2βJ_x` for each
/// edge; returns the values per edge.
pub fn domination_chain(w: &WeightedGraph, root: Option<usize>, beta: f64) -> Result<Vec<[f64; 5]>> {
    guard_support(w)?;
    let m = w.edge_count();
    let ld = loop_distribution_on(w, beta)?;
    let t0 = support_table(w, all_edges(w), beta, None, &[], None)?;
    let z: f64 = t0.iter().sum();
    let fk = rc_sums(w, root, 2.0, beta, m, |c, out| {
        for (o, &b) in out.iter_mut().zip(c.open) {
            *o = f64::from(u8::from(b));
        }
    })?;
    Ok((0..m)
        .map(|e| {
            let c: f64 = t0.iter().enumerate().filter(|(s, _)| s >> e & 1 == 1).map(|(_, w)| w).sum::<f64>() / z;
            let a = beta * w.edge(e).j;
            [ld.edge_marginal(e), c, fk[e], -(-2.0 * a).exp_m1(), 2.0 * a]
        })
        .collect())
}

/// Convenience: working graph, root and element masks of a base graph at field `h`.
pub fn working(g: &WeightedGraph, h: f64) -> Result<FieldGraph> {
    FieldGraph::natural(g, h)
}
