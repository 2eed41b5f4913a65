use crate::error::{invalid, Error, Result};
use crate::graph::{FieldGraph, WeightedGraph};
use crate::model::ModelParams;

/// Limit on working-graph edges for support-indexed tables (`2^m` entries).
pub const SUPPORT_MAX_EDGES: usize = 20;
const CLASS_MAX_EDGES: usize = 16;
const BRUTE_MAX_TERMS: f64 = 1e8;

/// `(Σ_{n even, n ≥ 2} a^n/n!, Σ_{n odd} a^n/n!)`, untruncated or cut at `nmax`.
pub fn even_odd_parts(a: f64, nmax: Option<u32>) -> (f64, f64) {
    match nmax {
        None => {
            let s = (0.5 * a).sinh();
            (2.0 * s * s, a.sinh())
        }
        Some(cap) => {
            let (mut even, mut odd, mut term) = (0.0, 0.0, 1.0);
            for n in 1..=cap {
                term *= a / n as f64;
                if n % 2 == 1 {
                    odd += term;
                } else {
                    even += term;
                }
            }
            (even, odd)
        }
    }
}

fn factorial_tail_term(a: f64, nmax: u32) -> f64 {
    let mut t = 1.0;
    for n in 1..=nmax + 1 {
        t *= a / n as f64;
    }
    t
}

/// Bound on the mass of currents with some entry above `nmax`, for observables
/// bounded by `1`: `e^{Σ a} Σ a^{N+1}/(N+1)!`.
pub fn single_tail_bound(a: &[f64], nmax: Option<u32>) -> f64 {
    match nmax {
        None => 0.0,
        Some(n) => {
            let sa: f64 = a.iter().sum();
            sa.exp() * a.iter().map(|&x| factorial_tail_term(x, n)).sum::<f64>()
        }
    }
}

/// Same for pairs of independent currents with activities `a1` and `a2`.
pub fn double_tail_bound(a1: &[f64], a2: &[f64], nmax: Option<u32>) -> f64 {
    match nmax {
        None => 0.0,
        Some(n) => {
            let s: f64 = a1.iter().chain(a2).sum();
            s.exp() * a1.iter().chain(a2).map(|&x| factorial_tail_term(x, n)).sum::<f64>()
        }
    }
}

/// Error bound on `num/den` when the truncated sums miss at most `b_num` and `b_den`.
pub fn ratio_bound(b_num: f64, b_den: f64, num: f64, den: f64) -> f64 {
    (b_num + (num / den).abs() * b_den) / den
}

fn activities(g: &WeightedGraph, beta: f64) -> Vec<f64> {
    g.edges().iter().map(|e| beta * e.j).collect()
}

fn vertex_mask(g: &WeightedGraph, vs: &[usize]) -> Result<u64> {
    if g.vertex_count() > 64 {
        return invalid("current engines support at most 64 vertices");
    }
    let mut m = 0u64;
    for &v in vs {
        if v >= g.vertex_count() {
            return invalid(format!("source {v} is not a vertex"));
        }
        m ^= 1u64 << v;
    }
    Ok(m)
}

/// `Σ_{∂n = sources, n_e ≤ nmax} w_β(n) F(n)` by direct enumeration, with the tail
/// bound for `|F| ≤ 1`. Sources are taken as a set with multiplicity mod 2.
pub fn brute_current_sum<F>(g: &WeightedGraph, beta: f64, sources: &[usize], nmax: u32, mut f: F) -> Result<(f64, f64)>
where
    F: FnMut(&[u32]) -> f64,
{
    let m = g.edge_count();
    let terms = (nmax as f64 + 1.0).powi(m as i32);
    if terms > BRUTE_MAX_TERMS {
        return Err(Error::SizeGuard(format!("{terms:.3e} current terms exceed {BRUTE_MAX_TERMS:.0e}")));
    }
    let target = vertex_mask(g, sources)?;
    let a = activities(g, beta);
    let table: Vec<Vec<f64>> = a
        .iter()
        .map(|&x| {
            let mut t = vec![1.0; nmax as usize + 1];
            for n in 1..=nmax as usize {
                t[n] = t[n - 1] * x / n as f64;
            }
            t
        })
        .collect();
    // vertices whose parity is final once edge i is assigned
    let mut last = vec![0u64; m];
    for v in 0..g.vertex_count() {
        if let Some(&(e, _)) = g.incident(v).iter().max_by_key(|&&(e, _)| e) {
            last[e] |= 1u64 << v;
        } else if target >> v & 1 == 1 {
            return Ok((0.0, single_tail_bound(&a, Some(nmax))));
        }
    }
    let ends: Vec<u64> = g.edges().iter().map(|e| (1u64 << e.u) | (1u64 << e.v)).collect();
    let mut n = vec![0u32; m];
    let mut total = 0.0;
    fn rec<F: FnMut(&[u32]) -> f64>(
        i: usize,
        par: u64,
        w: f64,
        ctx: (&[Vec<f64>], &[u64], &[u64], u64, u32),
        n: &mut [u32],
        f: &mut F,
        total: &mut f64,
    ) {
        let (table, ends, last, target, nmax) = ctx;
        if i == n.len() {
            *total += w * f(n);
            return;
        }
        for k in 0..=nmax {
            let p = if k % 2 == 1 { par ^ ends[i] } else { par };
            if (p ^ target) & last[i] != 0 {
                continue;
            }
            n[i] = k;
            rec(i + 1, p, w * table[i][k as usize], ctx, n, f, total);
        }
        n[i] = 0;
    }
    if m == 0 {
        return Ok((if target == 0 { f(&n) } else { 0.0 }, 0.0));
    }
    rec(0, 0, 1.0, (&table, &ends, &last, target, nmax), &mut n, &mut f, &mut total);
    Ok((total, single_tail_bound(&a, Some(nmax))))
}

/// Current sum on the natural working graph of `g` at `(β, h)`; sources may include
/// the root (boundary or ghost).
pub fn current_sum<F>(g: &WeightedGraph, p: &ModelParams, sources: &[usize], nmax: u32, f: F) -> Result<(f64, f64)>
where
    F: FnMut(&[u32]) -> f64,
{
    let fg = FieldGraph::natural(g, p.h)?;
    brute_current_sum(&fg.graph, p.beta, sources, nmax, f)
}

/// One class assignment of the class engine.
#[derive(Clone, Copy, Debug)]
pub struct ClassVisit {
    /// Edges with odd current.
    pub odd: u64,
    /// Edges with positive current.
    pub support: u64,
    /// Vertices with odd incident current.
    pub boundary: u64,
    /// Total weight of the currents in this class.
    pub weight: f64,
}

/// Enumerates the `3^m` classes zero / odd / even-positive per allowed edge.
///
/// The weight of a class is the sum of `w_β(n)` over currents in it (each entry
/// capped at `nmax`). If `forced_one` is set, that edge is restricted to `n_e = 1`.
pub fn class_sums<F>(g: &WeightedGraph, allowed: u64, beta: f64, nmax: Option<u32>, forced_one: Option<usize>, mut visit: F) -> Result<()>
where
    F: FnMut(ClassVisit),
{
    let m = g.edge_count();
    if m > 64 || g.vertex_count() > 64 {
        return invalid("class engine supports at most 64 edges and vertices");
    }
    let edges: Vec<usize> = (0..m).filter(|&e| allowed >> e & 1 == 1).collect();
    if edges.len() > CLASS_MAX_EDGES {
        return Err(Error::SizeGuard(format!(
            "class engine: 3^{} classes exceed 3^{CLASS_MAX_EDGES}",
            edges.len()
        )));
    }
    if let Some(e) = forced_one {
        if allowed >> e & 1 == 0 {
            return invalid("forced edge is not allowed");
        }
    }
    let parts: Vec<(f64, f64)> = edges
        .iter()
        .map(|&e| {
            let a = beta * g.edge(e).j;
            if Some(e) == forced_one {
                (0.0, a)
            } else {
                even_odd_parts(a, nmax)
            }
        })
        .collect();
    let forced_idx = forced_one.and_then(|e| edges.iter().position(|&x| x == e));
    let ends: Vec<u64> = edges.iter().map(|&e| (1u64 << g.edge(e).u) | (1u64 << g.edge(e).v)).collect();
    let k = edges.len();
    // explicit stack: (index, class) with running state
    let mut class = vec![0u8; k];
    let mut odd = vec![0u64; k + 1];
    let mut sup = vec![0u64; k + 1];
    let mut bnd = vec![0u64; k + 1];
    let mut w = vec![1.0f64; k + 1];
    let mut i = 0usize;
    if k == 0 {
        visit(ClassVisit { odd: 0, support: 0, boundary: 0, weight: 1.0 });
        return Ok(());
    }
    class[0] = if forced_idx == Some(0) { 1 } else { 0 };
    loop {
        // apply class[i] at level i
        let e = edges[i];
        let (even, oddw) = parts[i];
        let (o, s, b, wi) = match class[i] {
            0 => (odd[i], sup[i], bnd[i], w[i]),
            1 => (odd[i] | 1 << e, sup[i] | 1 << e, bnd[i] ^ ends[i], w[i] * oddw),
            _ => (odd[i], sup[i] | 1 << e, bnd[i], w[i] * even),
        };
        odd[i + 1] = o;
        sup[i + 1] = s;
        bnd[i + 1] = b;
        w[i + 1] = wi;
        if i + 1 == k {
            if wi != 0.0 {
                visit(ClassVisit { odd: o, support: s, boundary: b, weight: wi });
            }
        } else if wi != 0.0 {
            i += 1;
            class[i] = if forced_idx == Some(i) { 1 } else { 0 };
            continue;
        }
        // advance to the next class assignment
        loop {
            let limit = if forced_idx == Some(i) { 1 } else { 2 };
            if class[i] < limit {
                class[i] += 1;
                break;
            }
            if i == 0 {
                return Ok(());
            }
            i -= 1;
        }
    }
}

/// Weight of sourceless-or-sourced currents by support: entry `S` is the total
/// `w_β` of currents with `∂n = target` and support exactly `S`.
pub fn support_table(
    g: &WeightedGraph,
    allowed: u64,
    beta: f64,
    nmax: Option<u32>,
    target: &[usize],
    forced_one: Option<usize>,
) -> Result<Vec<f64>> {
    let m = g.edge_count();
    if m > SUPPORT_MAX_EDGES {
        return Err(Error::SizeGuard(format!("support table needs 2^{m} entries (limit 2^{SUPPORT_MAX_EDGES})")));
    }
    let t = vertex_mask(g, target)?;
    let mut table = vec![0.0; 1usize << m];
    class_sums(g, allowed, beta, nmax, forced_one, |c| {
        if c.boundary == t {
            table[c.support as usize] += c.weight;
        }
    })?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cycle_graph, path_graph};

    #[test]
    fn k2_even_and_odd_series() {
        let g = path_graph(2, 1.0).unwrap();
        let beta: f64 = 0.8;
        let (z0, t0) = brute_current_sum(&g, beta, &[], 14, |_| 1.0).unwrap();
        let (z1, t1) = brute_current_sum(&g, beta, &[0, 1], 14, |_| 1.0).unwrap();
        assert!((z0 - beta.cosh()).abs() <= 1e-12 + t0);
        assert!((z1 - beta.sinh()).abs() <= 1e-12 + t1);
        assert!((z1 / z0 - beta.tanh()).abs() < 1e-12);
    }

    #[test]
    fn odd_sources_give_zero() {
        let g = path_graph(3, 1.0).unwrap();
        let (z, _) = brute_current_sum(&g, 0.5, &[0], 8, |_| 1.0).unwrap();
        assert_eq!(z, 0.0);
    }

    #[test]
    fn class_engine_matches_brute_force() {
        let g = cycle_graph(3, 1.0).unwrap();
        let beta = 0.9;
        for target in [vec![], vec![0, 1], vec![1, 2]] {
            let (brute, tail) = brute_current_sum(&g, beta, &target, 16, |_| 1.0).unwrap();
            let t = support_table(&g, 0b111, beta, Some(16), &target, None).unwrap();
            let class: f64 = t.iter().sum();
            assert!((brute - class).abs() < 1e-12, "{brute} vs {class}");
            let exact: f64 = support_table(&g, 0b111, beta, None, &target, None).unwrap().iter().sum();
            assert!((exact - class).abs() <= tail);
        }
    }

    #[test]
    fn forced_one_restricts_edge() {
        let g = path_graph(2, 1.0).unwrap();
        let t = support_table(&g, 1, 0.7, None, &[0, 1], Some(0)).unwrap();
        assert!((t[1] - 0.7).abs() < 1e-15);
        assert_eq!(t[0], 0.0);
    }

    #[test]
    fn series_parts_converge() {
        let (e, o) = even_odd_parts(1.3, Some(40));
        let (e2, o2) = even_odd_parts(1.3, None);
        assert!((e - e2).abs() < 1e-15 && (o - o2).abs() < 1e-15);
    }
}
