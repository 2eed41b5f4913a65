//! Monte Carlo samplers against exact enumeration at three standard errors.

use graphrep::currents::{
    detect_event_a, gradient_lhs, lupu_werner_fk, lupu_werner_from_loops, Worm, ExactCurrentSampler, ExactLoopSampler,
    QParams, QSampler,
};
use graphrep::exact::{current_sum, rc_probability};
use graphrep::graph::{build_line_window, cycle_graph, path_graph, FieldGraph, Mode};
use graphrep::model::{ModelParams, PercConfig};
use graphrep::rng::RngStream;
use graphrep::samplers::{color_red_white, pire_sample, CoupledFk, Environment, FkHeatBath, Glauber, SwendsenWang, Wolff};
use graphrep::stats::{batch_means, Moments};

fn assert_close(what: &str, est: graphrep::stats::EstimatorSummary, exact: f64) {
    assert!(est.matches(exact, 3.0, 1e-12), "{what}: {} ± {} vs exact {exact}", est.mean, est.se);
}

fn iid(xs: impl Iterator<Item = f64>) -> graphrep::stats::EstimatorSummary {
    let mut m = Moments::new();
    xs.for_each(|x| m.push(x));
    m.summary(0)
}

#[test]
fn glauber_and_wolff_two_point_on_k2() {
    let g = path_graph(2, 1.0).unwrap();
    let beta = 0.6;
    let mut rng = RngStream::new(11, 0);
    let mut ch = Glauber::new(&g, None, beta);
    let xs: Vec<f64> = (0..100_000)
        .map(|_| {
            ch.sweep(&mut rng);
            f64::from(ch.state.s[0] * ch.state.s[1])
        })
        .collect();
    assert_close("glauber", batch_means(&xs, 50, 11), beta.tanh());
    let mut w = Wolff::new(&g, None, beta);
    let xs: Vec<f64> = (0..100_000)
        .map(|_| {
            w.step(&mut rng);
            f64::from(w.state().s[0] * w.state().s[1])
        })
        .collect();
    assert_close("wolff", batch_means(&xs, 50, 11), beta.tanh());
}

#[test]
fn pire_edge_count_on_cycle() {
    let env = Environment::constant(4, 0.3).unwrap();
    let mut rng = RngStream::new(12, 0);
    let est = iid((0..100_000).map(|_| pire_sample(&env, &mut rng).open_count() as f64));
    assert_close("pire", est, 1.2);
}

#[test]
fn edwards_sokal_round_trip_keeps_wired_marginals() {
    let vol = build_line_window(2, Mode::Wired).unwrap();
    let p = ModelParams::ising(0.5, 0.3).unwrap();
    let fg = FieldGraph::natural(&vol.graph, p.h).unwrap();
    let mut sw = SwendsenWang::new(&fg.graph, fg.root, p.beta);
    let mut rng = RngStream::new(13, 0);
    let m = fg.graph.edge_count();
    let mut series = vec![Vec::new(); m];
    for _ in 0..100_000 {
        sw.step(&mut rng);
        for (e, s) in series.iter_mut().enumerate() {
            s.push(f64::from(u8::from(sw.bonds.open[e])));
        }
    }
    for (e, s) in series.iter().enumerate() {
        let exact = rc_probability(&vol, &p, |c| c.open[e]).unwrap();
        assert_close(&format!("es edge {e}"), batch_means(s, 50, 13), exact);
    }
}

#[test]
fn grimmett_legs_and_ordering() {
    let vol = build_line_window(2, Mode::Wired).unwrap();
    let (p1, p2) = (ModelParams::ising(0.3, 0.1).unwrap(), ModelParams::ising(0.7, 0.4).unwrap());
    let fg = FieldGraph::natural(&vol.graph, p2.h).unwrap();
    let lo = graphrep::samplers::couplings(&fg, p1.beta, p1.h);
    let hi = graphrep::samplers::couplings(&fg, p2.beta, p2.h);
    let mut ch = CoupledFk::new(&fg.graph, 2.0, &lo, &hi).unwrap();
    let mut rng = RngStream::new(14, 0);
    let m = fg.graph.edge_count();
    let (mut a, mut b) = (vec![Vec::new(); m], vec![Vec::new(); m]);
    for _ in 0..100_000 {
        assert!(ch.sweep(&mut rng));
        for e in 0..m {
            a[e].push(f64::from(u8::from(ch.low.state.open[e])));
            b[e].push(f64::from(u8::from(ch.high.state.open[e])));
        }
    }
    assert_eq!(ch.ordered_sweeps, ch.sweeps);
    let fg1 = FieldGraph::natural(&vol.graph, p1.h).unwrap();
    for e in 0..m {
        // element of edge e, looked up in the leg's own working graph
        let x = fg.edge_element(e);
        let low_exact = match fg1.element_edge(x) {
            Some(e1) if e1 < fg1.graph.edge_count() => rc_probability(&vol, &p1, |c| c.open[e1]).unwrap(),
            _ => 0.0,
        };
        let high_exact = rc_probability(&vol, &p2, |c| c.open[e]).unwrap();
        assert_close(&format!("low leg {e}"), batch_means(&a[e], 50, 14), low_exact);
        assert_close(&format!("high leg {e}"), batch_means(&b[e], 50, 14), high_exact);
    }
}

#[test]
fn red_edges_are_bernoulli_given_red_set() {
    let g = path_graph(2, 1.0).unwrap();
    let beta = 0.5;
    let mut ch = FkHeatBath::new(&g, 2.0, &[beta]).unwrap();
    let mut rng = RngStream::new(15, 0);
    let mut xs = Vec::new();
    for _ in 0..100_000 {
        ch.sweep(&mut rng);
        let rw = color_red_white(&g, None, &ch.state, 2.0, &mut rng).unwrap();
        if rw.red[0] && rw.red[1] {
            xs.push(f64::from(u8::from(rw.restricted.open[0])));
        }
    }
    assert_close("red edge", batch_means(&xs, 50, 15), 1.0 - (-2.0 * beta).exp());
}

#[test]
fn worm_triangle_cycle_probability() {
    let g = cycle_graph(3, 1.0).unwrap();
    let beta = 0.7;
    let mut w = Worm::new(&g, beta);
    let mut rng = RngStream::new(16, 0);
    let mut xs = Vec::new();
    while xs.len() < 100_000 {
        w.step(&mut rng);
        if w.is_closed() {
            assert!(w.config().is_sourceless(&g));
            xs.push(f64::from(u8::from(w.bits()[0])));
        }
    }
    let t3 = beta.tanh().powi(3);
    assert_close("worm", batch_means(&xs, 50, 16), t3 / (1.0 + t3));
}

#[test]
fn magnitudes_match_current_law_on_triangle() {
    let g = cycle_graph(3, 1.0).unwrap();
    let p = ModelParams::ising(0.9, 0.0).unwrap();
    let s = ExactCurrentSampler::at_beta(&g, p.beta).unwrap();
    let mut rng = RngStream::new(17, 0);
    let draws: Vec<u32> = (0..100_000).map(|_| s.sample(&mut rng).n[0]).collect();
    let (z, _) = current_sum(&g, &p, &[], 30, |_| 1.0).unwrap();
    for k in 0..4u32 {
        let (num, _) = current_sum(&g, &p, &[], 30, |n| f64::from(u8::from(n[0] == k))).unwrap();
        let est = iid(draws.iter().map(|&d| f64::from(u8::from(d == k))));
        assert_close(&format!("P(n=={k})"), est, num / z);
    }
}

#[test]
fn lupu_werner_reproduces_fk_marginals() {
    let vol = build_line_window(2, Mode::Wired).unwrap();
    let p = ModelParams::ising(0.6, 0.4).unwrap();
    let fg = FieldGraph::natural(&vol.graph, p.h).unwrap();
    let cur = ExactCurrentSampler::at_beta(&fg.graph, p.beta).unwrap();
    let a: Vec<f64> = fg.graph.edges().iter().map(|e| p.beta * e.j).collect();
    let loops = ExactLoopSampler::new(&fg.graph, &a).unwrap();
    let mut rng = RngStream::new(18, 0);
    let k = 100_000;
    let via_current: Vec<PercConfig> = (0..k).map(|_| lupu_werner_fk(&fg.graph, &cur.sample(&mut rng), p.beta, &mut rng)).collect();
    let via_loops: Vec<PercConfig> = (0..k).map(|_| lupu_werner_from_loops(&fg.graph, &loops.sample(&mut rng), p.beta, &mut rng)).collect();
    for e in 0..fg.graph.edge_count() {
        let exact = rc_probability(&vol, &p, |c| c.open[e]).unwrap();
        assert_close("lw current", iid(via_current.iter().map(|w| f64::from(u8::from(w.open[e])))), exact);
        assert_close("lw loops", iid(via_loops.iter().map(|w| f64::from(u8::from(w.open[e])))), exact);
    }
}

#[test]
fn q_aggregate_has_single_current_law() {
    let vol = build_line_window(2, Mode::Wired).unwrap();
    let qp = QParams::new(0.3, 0.1, 0.8, 0.5).unwrap();
    let s = QSampler::new(&vol, qp).unwrap();
    let mut rng = RngStream::new(19, 0);
    let draws: Vec<_> = (0..100_000).map(|_| s.sample(&mut rng)).collect();
    let p2 = ModelParams::ising(qp.beta2, qp.h2).unwrap();
    let (z, _) = current_sum(&vol.graph, &p2, &[], 30, |_| 1.0).unwrap();
    for x in 0..s.graph().edge_count() {
        for k in 0..3u32 {
            let (num, _) = current_sum(&vol.graph, &p2, &[], 30, |n| f64::from(u8::from(n[x] == k))).unwrap();
            let est = iid(draws.iter().map(|q| f64::from(u8::from(q.aggregate(x) == k))));
            assert_close(&format!("aggregate x={x} k={k}"), est, num / z);
        }
    }
}

#[test]
fn gradient_bounded_by_event_probability_on_k2_wired() {
    let vol = build_line_window(2, Mode::Wired).unwrap();
    let qp = QParams::new(0.3, 0.1, 0.5, 0.2).unwrap();
    let s = QSampler::new(&vol, qp).unwrap();
    let m = s.graph().edge_count();
    let mut rng = RngStream::new(20, 0);
    let mut hits = vec![Moments::new(); m];
    for _ in 0..100_000 {
        let q = s.sample(&mut rng);
        for (x, h) in hits.iter_mut().enumerate() {
            h.push(f64::from(u8::from(detect_event_a(&q, x, &s.fg).unwrap())));
        }
    }
    for (x, h) in hits.iter().enumerate() {
        let lhs = gradient_lhs(&vol, qp, x).unwrap();
        assert!(lhs > 0.0);
        assert!(lhs <= h.mean() + 3.0 * h.se(), "x={x}: lhs {lhs} vs {} ± {}", h.mean(), h.se());
    }
}
