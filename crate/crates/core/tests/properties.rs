//! Property tests for the structural invariants of graphs, samplers, currents,
//! spectral estimators and the configuration format.

use graphrep::cli::Config;
use graphrep::currents::{magnitudes_from_parities, QParams, QSampler, Worm};
use graphrep::graph::{
    add_ghost_vertex, build_line_window, build_torus, build_tree_ball, double_edges, strip_ghost, Edge, FieldGraph,
    Mode, WeightedGraph,
};
use graphrep::rng::RngStream;
use graphrep::samplers::{CoupledFk, SwendsenWang};
use graphrep::spectral::{process_cov_decay, rho_graph_estimate, return_probability, ShiftRule, WalkKernel};
use graphrep::stats::sig9;
use proptest::prelude::*;

/// Connected multigraph on `n` vertices: a spanning path plus random extra edges.
fn graph_strategy(max_n: usize, max_extra: usize) -> impl Strategy<Value = WeightedGraph> {
    (2..=max_n).prop_flat_map(move |n| {
        let path = proptest::collection::vec(0.1f64..2.0, n - 1);
        let extra = proptest::collection::vec((0..n, 0..n, 0.1f64..2.0), 0..=max_extra);
        (Just(n), path, extra).prop_map(|(n, path, extra)| {
            let mut edges: Vec<Edge> = path.iter().enumerate().map(|(i, &j)| Edge::new(i, i + 1, j)).collect();
            edges.extend(extra.into_iter().filter(|(u, v, _)| u != v).map(|(u, v, j)| Edge::new(u, v, j)));
            WeightedGraph::new(n, edges, None).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, .. ProptestConfig::default() })]

    #[test]
    fn wired_tree_ball_is_regular(k in 3usize..6, r in 1usize..5) {
        let vol = build_tree_ball(k, r, Mode::Wired).unwrap();
        let b = vol.graph.boundary().unwrap();
        for v in (0..vol.graph.vertex_count()).filter(|&v| v != b) {
            prop_assert_eq!(vol.graph.degree(v), k);
        }
    }

    #[test]
    fn graph_json_round_trip(g in graph_strategy(8, 8), wired in any::<bool>()) {
        let g = if wired {
            let mut edges = g.edges().to_vec();
            let n = g.vertex_count();
            edges.push(Edge::new(0, n, 0.7));
            WeightedGraph::new(n + 1, edges, Some(n)).unwrap()
        } else {
            g
        };
        let back = WeightedGraph::from_json(&g.to_json()).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(back.hash_hex(), g.hash_hex());
    }

    #[test]
    fn doubling_preserves_weight_exactly(g in graph_strategy(6, 6), theta in 0.01f64..0.99) {
        let d = double_edges(&g, theta).unwrap();
        for e in 0..g.edge_count() {
            let (a, b) = d.copies(e);
            prop_assert_eq!(d.graph.edge(a).j + d.graph.edge(b).j, g.edge(e).j);
        }
    }

    #[test]
    fn ghost_vertex_strips_back(g in graph_strategy(7, 5), h in 0.01f64..3.0) {
        let with = add_ghost_vertex(&g, h).unwrap();
        prop_assert_eq!(strip_ghost(&with).unwrap(), g);
    }

    #[test]
    fn grimmett_coupling_stays_ordered(
        g in graph_strategy(6, 5), b1 in 0.0f64..1.2, db in 0.0f64..0.8, h1 in 0.0f64..0.6, dh in 0.0f64..0.6,
        q in 1.0f64..4.0, seed in 0u64..1000,
    ) {
        let (b2, h2) = (b1 + db, h1 + dh);
        let fg = FieldGraph::new(&g, h2.max(1e-9), graphrep::graph::Bc::Free).unwrap();
        let lo = graphrep::samplers::couplings(&fg, b1, h1);
        let hi = graphrep::samplers::couplings(&fg, b2, h2);
        let mut c = CoupledFk::new(&fg.graph, q, &lo, &hi).unwrap();
        let mut rng = RngStream::new(seed, 0);
        for _ in 0..30 {
            prop_assert!(c.sweep(&mut rng));
        }
    }

    #[test]
    fn same_seed_same_configuration(g in graph_strategy(6, 4), beta in 0.0f64..1.5, seed in 0u64..1000) {
        let run = || {
            let mut sw = SwendsenWang::new(&g, None, beta);
            let mut rng = RngStream::new(seed, 3);
            (0..20).for_each(|_| sw.step(&mut rng));
            (sw.spins.s.clone(), sw.bonds.open.clone())
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn worm_closed_states_are_sourceless(g in graph_strategy(6, 6), beta in 0.05f64..1.5, seed in 0u64..1000) {
        let mut w = Worm::new(&g, beta);
        let mut rng = RngStream::new(seed, 0);
        for _ in 0..20 {
            w.run_closed(5, &mut rng);
            let l = w.config();
            prop_assert!(l.is_sourceless(&g));
            // lifting a sourceless parity configuration gives a sourceless current
            let n = magnitudes_from_parities(&g, &l, beta, &mut rng);
            prop_assert!(n.sources(&g).is_empty());
        }
    }

    #[test]
    fn first_layer_open_implies_second(
        b1 in 0.0f64..1.0, db in 0.01f64..0.8, h1 in 0.0f64..0.6, dh in 0.0f64..0.6, len in 2usize..4, seed in 0u64..500,
    ) {
        let vol = build_line_window(len, Mode::Wired).unwrap();
        let qp = QParams::new(b1, h1, b1 + db, h1 + dh).unwrap();
        let s = QSampler::new(&vol, qp).unwrap();
        let mut rng = RngStream::new(seed, 0);
        for _ in 0..50 {
            let q = s.sample(&mut rng);
            for x in 0..s.graph().edge_count() {
                prop_assert!(!q.one_open(x) || q.two_open(x));
            }
        }
    }

    #[test]
    fn rho_sequence_monotone(g in graph_strategy(7, 7), steps in 4usize..40) {
        let est = rho_graph_estimate(&g, 0, steps).unwrap();
        for w in est.sequence.windows(2) {
            prop_assert!(w[1] >= w[0] * (1.0 - 1e-12));
        }
        prop_assert!(est.rho_hat <= 1.0 + 1e-12);
    }

    #[test]
    fn odd_returns_vanish_on_bipartite(k in 3usize..5, r in 1usize..4, half_l in 2usize..5, n in 0usize..8) {
        let tree = build_tree_ball(k, r, Mode::Wired).unwrap();
        prop_assert_eq!(return_probability(&tree.graph, tree.origin, 2 * n + 1).unwrap(), 0.0);
        let torus = build_torus(2, 2 * half_l, 1.0).unwrap();
        prop_assert_eq!(return_probability(&torus, 0, 2 * n + 1).unwrap(), 0.0);
    }

    #[test]
    fn covariance_bounded_by_variance(l in 3usize..6, p in 0.05f64..0.95, seed in 0u64..500) {
        let torus = build_torus(2, l, 1.0).unwrap();
        let n = torus.vertex_count();
        let mut rng = RngStream::new(seed, 0);
        let s = process_cov_decay(
            &torus,
            ShiftRule::Translation,
            &[0, 2, 4, 8],
            100,
            |r| Ok((0..n).map(|_| f64::from(u8::from(r.bernoulli(p)))).collect()),
            &mut rng,
        ).unwrap();
        for c in &s.cov {
            prop_assert!(c.abs() <= s.cov[0] + 1e-12, "{} vs {}", c, s.cov[0]);
        }
    }

    #[test]
    fn config_round_trip(entries in proptest::collection::vec(
        (prop_oneof![Just(""), Just("graph"), Just("run"), Just("model")], "[a-z][a-z0-9_]{0,6}", "[a-zA-Z0-9.,=#\\-][a-zA-Z0-9 .,=#\\-]{0,10}[a-zA-Z0-9.,]"),
        0..12,
    )) {
        let mut c = Config::default();
        for (s, k, v) in &entries {
            c.set(s, k, v);
        }
        let once = Config::parse(&c.serialize()).unwrap();
        prop_assert_eq!(&once, &c);
        let twice = Config::parse(&once.serialize()).unwrap();
        prop_assert_eq!(&twice, &once);
        prop_assert_eq!(twice.serialize(), c.serialize());
    }

    #[test]
    fn sig9_reparses_to_nine_digits(x in prop_oneof![any::<f64>(), -1e6f64..1e6, -1e-6f64..1e-6]) {
        let s = sig9(x);
        if x.is_finite() {
            let y: f64 = s.parse().unwrap();
            let nine: f64 = format!("{x:.8e}").parse().unwrap();
            prop_assert_eq!(y, nine);
            prop_assert_eq!(sig9(y), s);
        }
    }
}

#[test]
fn walk_kernel_rejects_huge_dense_graphs() {
    let big = build_torus(2, 1001, 1.0).unwrap();
    assert!(WalkKernel::new(&big).is_err());
}
