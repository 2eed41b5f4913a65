use super::{guard_bits, BlockSum};
use crate::error::Result;
use crate::graph::{Bc, FieldGraph, FiniteVolume, WeightedGraph};
use crate::model::ModelParams;

/// Weighted sums of `k` spin observables over all configurations of `g` at zero
/// field, with `pinned` (if any) fixed to `+1`; returns the normalized expectations.
///
/// `f` receives the spin vector and writes the `k` observable values. Weights are
/// taken relative to the all-plus state, so the largest weight is `1`.
pub fn spin_sums<F>(g: &WeightedGraph, pinned: Option<usize>, beta: f64, k: usize, mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(&[i8], &mut [f64]),
{
    let n = g.vertex_count();
    let free: Vec<usize> = (0..n).filter(|&v| Some(v) != pinned).collect();
    guard_bits("spin enumeration", free.len())?;
    let emax = g.total_weight();
    let energy = |s: &[i8]| -> f64 { g.edges().iter().map(|e| e.j * (s[e.u] * s[e.v]) as f64).sum() };
    let mut s = vec![1i8; n];
    let mut e = emax;
    let mut z = BlockSum::new();
    let mut sums = vec![BlockSum::new(); k];
    let mut out = vec![0.0; k];
    let total: u64 = 1u64 << free.len();
    for step in 0..total {
        if step > 0 {
            // Gray code: flip the lowest set bit position of `step`.
            let i = step.trailing_zeros() as usize;
            let v = free[i];
            let local: f64 = g.incident(v).iter().map(|&(id, w)| g.edge(id).j * s[w] as f64).sum();
            e -= 2.0 * s[v] as f64 * local;
            s[v] = -s[v];
            if (step as usize).is_multiple_of(BlockSum::BLOCK) {
                e = energy(&s);
            }
        }
        let w = (beta * (e - emax)).exp();
        z.add(w);
        f(&s, &mut out);
        for (acc, &x) in sums.iter_mut().zip(&out) {
            acc.add(w * x);
        }
    }
    let z = z.total();
    Ok(sums.iter().map(|s| s.total() / z).collect())
}

/// `⟨F⟩` of the Ising model on a finite volume at `(β, h)` with free or plus
/// boundary condition.
///
/// `F` sees the spins of the working graph: base vertices keep their ids and, for a
/// free volume with `h > 0`, the ghost is the last vertex (always `+1`).
pub fn ising_expectation<F>(vol: &FiniteVolume, p: &ModelParams, f: F, bc: Bc) -> Result<f64>
where
    F: Fn(&[i8]) -> f64,
{
    let fg = FieldGraph::new(&vol.graph, p.h, bc)?;
    Ok(spin_sums(&fg.graph, fg.root, p.beta, 1, |s, out| out[0] = f(s))?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_line_window, build_tree_ball, path_graph, Mode};

    #[test]
    fn k2_two_point_is_tanh() {
        let vol = build_line_window(2, Mode::Free).unwrap();
        for &beta in &[0.0, 0.3, 1.1] {
            let p = ModelParams::ising(beta, 0.0).unwrap();
            let v = ising_expectation(&vol, &p, |s| (s[0] * s[1]) as f64, Bc::Free).unwrap();
            assert!((v - f64::tanh(beta)).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_temperature_symmetry() {
        let vol = build_tree_ball(3, 1, Mode::Free).unwrap();
        let p = ModelParams::ising(0.0, 0.0).unwrap();
        assert_eq!(ising_expectation(&vol, &p, |s| s[0] as f64, Bc::Free).unwrap(), 0.0);
    }

    #[test]
    fn single_spin_in_field() {
        let g = path_graph(1, 1.0).unwrap();
        let vol = FiniteVolume::from_graph(g, "point", 0).unwrap();
        let p = ModelParams::ising(0.7, 0.4).unwrap();
        let m = ising_expectation(&vol, &p, |s| s[0] as f64, Bc::Free).unwrap();
        assert!((m - f64::tanh(0.28)).abs() < 1e-14);
    }

    #[test]
    fn plus_needs_boundary() {
        let vol = build_tree_ball(3, 1, Mode::Free).unwrap();
        let p = ModelParams::ising(0.5, 0.0).unwrap();
        assert!(ising_expectation(&vol, &p, |_| 1.0, Bc::Plus).is_err());
    }
}
