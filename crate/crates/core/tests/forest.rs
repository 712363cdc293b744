use isoradial::elliptic::EllipticContext;
use isoradial::forest::*;
use isoradial::isograph::{FiniteGraph, PeriodicGraph, Track, VertexRef};
use isoradial::laplacian::{Massive, SparseLaplacian};
use isoradial::par::Exec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::collections::HashMap;
use std::f64::consts::PI;

fn enumerated_probability(ctx: &EllipticContext, fg: &FiniteGraph, events: &[FiniteEvent]) -> f64 {
    let lap = SparseLaplacian::new(ctx, fg);
    let forests = enumerate_forests(fg, 12).unwrap();
    let (mut hit, mut total) = (0.0, 0.0);
    for f in &forests {
        let w = f.weight(&lap, fg, ctx);
        total += w;
        if events.iter().all(|&e| f.contains(e)) {
            hit += w;
        }
    }
    hit / total
}

fn kernel_probability(ctx: &EllipticContext, fg: &FiniteGraph, events: &[FiniteEvent]) -> f64 {
    let lap = SparseLaplacian::new(ctx, fg);
    let g = finite_green(&lap);
    let items: Vec<_> = events.iter().map(|&e| finite_item(&lap, fg, ctx, e)).collect();
    transfer_impedance(&items, |a, b| g[(a, b)]).unwrap().marginal().unwrap()
}

#[test]
fn edge_and_root_pair_on_a_six_vertex_patch() {
    let g = PeriodicGraph::preset("square").unwrap();
    let o = VertexRef::new(0, 0, 0);
    let mut verts = g.ball(&[o], 3);
    verts.truncate(6);
    let fg = g.induced(&verts);
    assert_eq!(fg.len(), 6);
    let ctx = EllipticContext::new(0.7).unwrap();
    for e in 0..fg.edges.len() {
        for x in 0..fg.len() {
            let ev = [FiniteEvent::Edge(e), FiniteEvent::Root(x)];
            let (a, b) = (kernel_probability(&ctx, &fg, &ev), enumerated_probability(&ctx, &fg, &ev));
            assert!((a - b).abs() < 1e-10, "edge {e} root {x}: {a} vs {b}");
        }
    }
}

#[test]
fn random_item_sets_on_a_small_torus() {
    let fg = PeriodicGraph::preset("hexagonal").unwrap().torus(2, 2).unwrap();
    let ctx = EllipticContext::new(0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..30 {
        let mut ev: Vec<FiniteEvent> = Vec::new();
        while ev.len() < rng.gen_range(1..4) {
            let e = if rng.gen_bool(0.6) {
                FiniteEvent::Edge(rng.gen_range(0..fg.edges.len()))
            } else {
                FiniteEvent::Root(rng.gen_range(0..fg.len()))
            };
            if !ev.contains(&e) {
                ev.push(e);
            }
        }
        let (a, b) = (kernel_probability(&ctx, &fg, &ev), enumerated_probability(&ctx, &fg, &ev));
        assert!((a - b).abs() < 1e-9, "{ev:?}: {a} vs {b}");
    }
}

#[test]
fn distant_items_decorrelate() {
    let g = PeriodicGraph::preset("square").unwrap();
    let ctx = EllipticContext::new(0.9).unwrap();
    let m = Massive::new(&g, ctx.clone());
    let gr = |a: VertexRef, b: VertexRef| isoradial::green::green_local(&g, &ctx, a, b).unwrap().value;
    let e = &g.edges()[0];
    let edge = |s: i64| Item::Edge {
        tail: VertexRef::new(e.tail, s, 0),
        head: VertexRef::new(e.head, s + e.shift[0], e.shift[1]),
        rho: m.rho[0],
    };
    let single = transfer_impedance(&[edge(0)], gr).unwrap().marginal().unwrap();
    let near = transfer_impedance(&[edge(0), edge(1)], gr).unwrap().marginal().unwrap();
    let far = transfer_impedance(&[edge(0), edge(30)], gr).unwrap().marginal().unwrap();
    assert!((near - single * single).abs() > 1e-4);
    assert!((far - single * single).abs() < 1e-8);
}

#[test]
fn wilson_forest_frequencies_follow_the_weights() {
    // 4-cycle patch: 4 vertices, 4 edges
    let g = PeriodicGraph::preset("square").unwrap();
    let o = VertexRef::new(0, 0, 0);
    let verts = [o, o.translate(1, 0), o.translate(1, 1), o.translate(0, 1)];
    let fg = g.induced(&verts);
    let ctx = EllipticContext::new(0.9).unwrap();
    let lap = SparseLaplacian::new(&ctx, &fg);
    let forests = enumerate_forests(&fg, 12).unwrap();
    let weights: Vec<f64> = forests.iter().map(|f| f.weight(&lap, &fg, &ctx)).collect();
    let z: f64 = weights.iter().sum();
    let n = 1_000_000;
    let mut counts: HashMap<ForestSample, usize> = HashMap::new();
    for f in WilsonSampler::new(&lap, &fg, &ctx).sample_many(Exec::default(), n, 77) {
        *counts.entry(f).or_default() += 1;
    }
    // pool rare forests so every expected count is at least 5
    let (mut stat, mut cells, mut pool_obs, mut pool_exp) = (0.0, 0usize, 0.0, 0.0);
    for (f, w) in forests.iter().zip(&weights) {
        let exp = n as f64 * w / z;
        let obs = *counts.get(f).unwrap_or(&0) as f64;
        if exp < 5.0 {
            pool_obs += obs;
            pool_exp += exp;
        } else {
            stat += (obs - exp).powi(2) / exp;
            cells += 1;
        }
    }
    if pool_exp > 0.0 {
        stat += (pool_obs - pool_exp).powi(2) / pool_exp;
        cells += 1;
    }
    assert!(counts.len() <= forests.len());
    let p = 1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat);
    assert!(p > 0.01, "chi-square {stat} on {cells} cells, p = {p}");
}

#[test]
fn uniform_weight_scaling_shifts_free_energy() {
    let g = PeriodicGraph::preset("paper-fig4").unwrap();
    let m = Massive::new(&g, EllipticContext::new(0.6).unwrap());
    let (f, _) = free_energy_fourier(Exec::default(), &m, 1e-10).unwrap();
    let lambda = 2.5;
    let mut scaled = m.clone();
    for v in scaled.rho.iter_mut().chain(scaled.mass2.iter_mut()).chain(scaled.diag.iter_mut()) {
        *v *= lambda;
    }
    let (fs, _) = free_energy_fourier(Exec::default(), &scaled, 1e-10).unwrap();
    assert!((fs - f + g.num_vertices() as f64 * lambda.ln()).abs() < 1e-9);
}

#[test]
fn twisted_entropy_vanishes_as_the_rhombi_flatten() {
    let ctx = EllipticContext::new(0.5).unwrap();
    let tilted = |d: f64| {
        let t = |h, v, a| Track { h, v, alpha_bar: a };
        PeriodicGraph::from_tracks(&[t(1, 1, 0.0), t(-1, 1, d)], 0).unwrap()
    };
    let s: Vec<f64> = [0.8, 0.3, 0.1, 0.03].iter().map(|&d| twisted_entropy(&tilted(d), &ctx).abs()).collect();
    assert!(s.windows(2).all(|w| w[1] < w[0]), "{s:?}");
    assert!(s[3] < 0.15 * s[0], "{s:?}");
    let s: Vec<f64> = [PI - 0.8, PI - 0.1, PI - 0.03].iter().map(|&d| twisted_entropy(&tilted(d), &ctx).abs()).collect();
    assert!(s.windows(2).all(|w| w[1] < w[0]), "{s:?}");
}

#[test]
fn component_sizes_have_a_light_tail() {
    let ctx = EllipticContext::new(0.7).unwrap();
    let fg = PeriodicGraph::preset("square").unwrap().torus(24, 24).unwrap();
    let lap = SparseLaplacian::new(&ctx, &fg);
    let mut sizes: Vec<usize> = Vec::new();
    for f in WilsonSampler::new(&lap, &fg, &ctx).sample_many(Exec::default(), 40, 3) {
        let mut count: HashMap<usize, usize> = HashMap::new();
        for r in f.components(&fg) {
            *count.entry(r).or_default() += 1;
        }
        sizes.extend(count.values());
    }
    let n = sizes.len() as f64;
    let tail = |s: usize| sizes.iter().filter(|&&x| x >= s).count() as f64 / n;
    // the survival function falls by a fixed factor per doubling
    assert!(tail(2) > tail(8) && tail(8) > tail(32));
    assert!(tail(64) < 0.5 * tail(16));
    assert!(*sizes.iter().max().unwrap() < fg.len());
}
