use super::{Edge, FiniteVolume, Mode, Parent, ShiftLabels, WeightedGraph};
use crate::error::{invalid, Result};
use std::collections::HashMap;

/// Largest vertex count any builder will allocate.
pub const MAX_BUILD_VERTICES: usize = 50_000_000;

/// Torus `(Z/L)^d` with uniform weight; edges to the `+1` neighbour in each direction.
pub fn build_torus(d: usize, l: usize, j: f64) -> Result<WeightedGraph> {
    if d == 0 {
        return invalid("torus dimension must be at least 1");
    }
    if l < 2 {
        return invalid("torus side length must be at least 2");
    }
    let n = l.checked_pow(d as u32).filter(|&n| n <= MAX_BUILD_VERTICES);
    let n = match n {
        Some(n) => n,
        None => return invalid("torus too large"),
    };
    let mut coords = Vec::with_capacity(n);
    for v in 0..n {
        let mut c = vec![0i64; d];
        let mut x = v;
        for k in (0..d).rev() {
            c[k] = (x % l) as i64;
            x /= l;
        }
        coords.push(c);
    }
    let labels = ShiftLabels { periods: vec![l as i64; d], coords };
    let mut edges = Vec::with_capacity(d * n);
    for v in 0..n {
        for k in 0..d {
            let mut shift = vec![0i64; d];
            shift[k] = 1;
            edges.push(Edge::new(v, labels.translate(v, &shift), j));
        }
    }
    WeightedGraph::new(n, edges, None)?.with_labels(labels)
}

fn tree_ball_size(k: usize, r: usize) -> Option<usize> {
    let mut total: usize = 1;
    let mut layer: usize = k;
    for _ in 0..r {
        total = total.checked_add(layer)?;
        layer = layer.checked_mul(k - 1)?;
    }
    Some(total).filter(|&t| t <= MAX_BUILD_VERTICES)
}

/// Ball of radius `r` around the root of the `k`-regular tree.
///
/// Vertices are numbered in breadth-first order from the root `0`; in wired mode the
/// boundary vertex is last and every depth-`r` vertex sends `k - 1` unit edges to it.
pub fn build_tree_ball(k: usize, r: usize, mode: Mode) -> Result<FiniteVolume> {
    if k < 3 {
        return invalid("tree degree must be at least 3");
    }
    if r < 1 {
        return invalid("tree radius must be at least 1");
    }
    let n_tree = match tree_ball_size(k, r) {
        Some(n) => n,
        None => return invalid(format!("tree ball k={k} r={r} exceeds the vertex guard")),
    };
    let boundary = if mode == Mode::Wired { Some(n_tree) } else { None };
    let n = n_tree + boundary.map_or(0, |_| 1);
    let mut edges = Vec::with_capacity(n);
    let mut depth = vec![0usize; n_tree];
    let mut next = 1usize;
    for v in 0..n_tree {
        let children = if v == 0 { k } else { k - 1 };
        if depth[v] < r {
            for _ in 0..children {
                depth[next] = depth[v] + 1;
                edges.push(Edge::new(v, next, 1.0));
                next += 1;
            }
        } else if let Some(b) = boundary {
            for _ in 0..children {
                edges.push(Edge::new(v, b, 1.0));
            }
        }
    }
    debug_assert_eq!(next, n_tree);
    let g = WeightedGraph::new(n, edges, boundary)?;
    FiniteVolume::new(g, mode, Parent::new("tree", &[("k", k.to_string())], r), 0)
}

/// Cyclic factor of a free product: `Finite(m)` is `Z/m`, `Infinite` is `Z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CyclicFactor {
    Finite(u32),
    Infinite,
}

type Word = Vec<(u8, i64)>;

fn multiply(word: &Word, factor: u8, step: i64, order: Option<u32>) -> Word {
    let mut w = word.clone();
    match w.last_mut() {
        Some(last) if last.0 == factor => {
            let mut e = last.1 + step;
            if let Some(m) = order {
                e = e.rem_euclid(m as i64);
            }
            if e == 0 {
                w.pop();
            } else {
                last.1 = e;
            }
        }
        _ => {
            let e = match order {
                Some(m) => step.rem_euclid(m as i64),
                None => step,
            };
            w.push((factor, e));
        }
    }
    w
}

/// Ball of radius `r` in the Cayley graph of a free product of cyclic groups,
/// with respect to the generators of the factors and their inverses.
pub fn build_cayley_patch(factors: &[CyclicFactor], r: usize, mode: Mode) -> Result<FiniteVolume> {
    if factors.len() < 2 {
        return invalid("a single cyclic factor gives an amenable group; at least two factors are required");
    }
    if factors.iter().any(|f| matches!(f, CyclicFactor::Finite(m) if *m < 2)) {
        return invalid("finite cyclic factors must have order at least 2");
    }
    if factors.len() == 2 && factors.iter().all(|f| *f == CyclicFactor::Finite(2)) {
        return invalid("Z2 * Z2 is the infinite dihedral group, which is amenable");
    }
    // Generators as (factor, step, forward): forward steps create the edge.
    let mut gens: Vec<(u8, i64, bool)> = Vec::new();
    for (i, f) in factors.iter().enumerate() {
        match f {
            CyclicFactor::Finite(2) => gens.push((i as u8, 1, true)),
            _ => {
                gens.push((i as u8, 1, true));
                gens.push((i as u8, -1, false));
            }
        }
    }
    let order = |i: u8| match factors[i as usize] {
        CyclicFactor::Finite(m) => Some(m),
        CyclicFactor::Infinite => None,
    };
    let mut ids: HashMap<Word, usize> = HashMap::new();
    let mut words: Vec<Word> = vec![Vec::new()];
    let mut dist = vec![0usize];
    ids.insert(Vec::new(), 0);
    let mut head = 0;
    while head < words.len() {
        if dist[head] < r {
            for &(f, s, _) in &gens {
                let w = multiply(&words[head], f, s, order(f));
                if !ids.contains_key(&w) {
                    ids.insert(w.clone(), words.len());
                    words.push(w);
                    dist.push(dist[head] + 1);
                    if words.len() > MAX_BUILD_VERTICES {
                        return invalid("Cayley patch exceeds the vertex guard");
                    }
                }
            }
        }
        head += 1;
    }
    let n_ball = words.len();
    let boundary = if mode == Mode::Wired { Some(n_ball) } else { None };
    let mut edges = Vec::new();
    for v in 0..n_ball {
        for &(f, s, forward) in &gens {
            let w = multiply(&words[v], f, s, order(f));
            match ids.get(&w) {
                Some(&u) => {
                    let is_involution = factors[f as usize] == CyclicFactor::Finite(2);
                    if (is_involution && v < u) || (!is_involution && forward) {
                        edges.push(Edge::new(v, u, 1.0));
                    }
                }
                None => {
                    if let Some(b) = boundary {
                        edges.push(Edge::new(v, b, 1.0));
                    }
                }
            }
        }
    }
    let n = n_ball + boundary.map_or(0, |_| 1);
    let g = WeightedGraph::new(n, edges, boundary)?;
    let spec: Vec<String> = factors
        .iter()
        .map(|f| match f {
            CyclicFactor::Finite(m) => format!("Z{m}"),
            CyclicFactor::Infinite => "Z".to_string(),
        })
        .collect();
    FiniteVolume::new(g, mode, Parent::new("cayley", &[("factors", spec.join("*"))], r), 0)
}

/// Path on `n` vertices with uniform weight.
pub fn path_graph(n: usize, j: f64) -> Result<WeightedGraph> {
    let edges = (1..n).map(|v| Edge::new(v - 1, v, j)).collect();
    WeightedGraph::new(n, edges, None)
}

/// Cycle on `n >= 3` vertices with uniform weight.
pub fn cycle_graph(n: usize, j: f64) -> Result<WeightedGraph> {
    if n < 3 {
        return invalid("cycle needs at least 3 vertices");
    }
    let edges = (0..n).map(|v| Edge::new(v, (v + 1) % n, j)).collect();
    WeightedGraph::new(n, edges, None)
}

/// Window of `len` consecutive integers in `Z`; wired mode joins both ends to one
/// boundary vertex (for `len = 2` this is the "K2 wired" triangle).
pub fn build_line_window(len: usize, mode: Mode) -> Result<FiniteVolume> {
    if len < 1 {
        return invalid("window must contain a vertex");
    }
    let mut edges: Vec<Edge> = (1..len).map(|v| Edge::new(v - 1, v, 1.0)).collect();
    let boundary = if mode == Mode::Wired {
        edges.push(Edge::new(0, len, 1.0));
        edges.push(Edge::new(len - 1, len, 1.0));
        Some(len)
    } else {
        None
    };
    let n = len + boundary.map_or(0, |_| 1);
    let g = WeightedGraph::new(n, edges, boundary)?;
    FiniteVolume::new(g, mode, Parent::new("line", &[], len), 0)
}
