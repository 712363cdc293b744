//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the lines always reach
//! stdout. Exits non-zero if a criterion fails that is not listed in
//! `KNOWN_FAILURES`; those are reported as FAIL all the same.

use isoradial::asymptotics::{green_asymptotic, rate_from_amoeba, saddle_point};
use isoradial::elliptic::{identity_residuals, EllipticContext};
use isoradial::expfun::{harmonic_residual, ExpPath};
use isoradial::forest::{
    edge_root_sum, finite_green, free_energy_closed, free_energy_critical, free_energy_fourier, partition_function,
    phase_expansion_check, transfer_impedance, FiniteEvent, Item, WilsonSampler,
};
use isoradial::green::{
    diagonal_value, green_fourier, green_local, green_neighbor, green_truncated, massless_neighbor_difference,
    FourierOptions, TruncationOptions,
};
use isoradial::isograph::{FiniteGraph, PeriodicGraph, VertexRef, PRESETS};
use isoradial::laplacian::{Massive, SparseLaplacian};
use isoradial::par::Exec;
use isoradial::spectral::{
    char_poly, convex_hull, hole_area, hole_boundary, newton_polygon_from_tracks, tentacles, winding_number, Curve,
};
use isoradial::zinv::{star_triangle, yang_baxter_residual};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI};
use std::time::{Duration, Instant};

/// Criteria that cannot hold as stated; see the project notes. They still
/// print FAIL.
const KNOWN_FAILURES: &[usize] = &[13];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn ctx(k: f64) -> EllipticContext {
    EllipticContext::new(k).unwrap()
}

fn preset(p: &str) -> PeriodicGraph {
    PeriodicGraph::preset(p).unwrap()
}

fn within(t: Duration, secs: u64) -> bool {
    t <= Duration::from_secs(secs)
}

fn elliptic_identities() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: Vec<(&'static str, f64)> = Vec::new();
    for _ in 0..1000 {
        let c = ctx(rng.gen_range(0.05..0.95));
        let (kk, kkp) = (c.big_k(), c.big_kp());
        let mut pick = || C64::new(rng.gen_range(-2.0..2.0) * kk, rng.gen_range(-0.45..0.45) * kkp);
        let (u, v) = (pick(), pick());
        for (i, (name, r)) in identity_residuals(&c, u, v).into_iter().enumerate() {
            if worst.len() <= i {
                worst.push((name, 0.0));
            }
            worst[i].1 = worst[i].1.max(r);
        }
    }
    let max = worst.iter().map(|w| w.1).fold(0.0, f64::max);
    let pass = worst.len() >= 12 && max < 1e-9 && within(start.elapsed(), 10);
    outcome(pass, format!("{} identities x 1000 points, max residual {max:.1e}, {:.1?}", worst.len(), start.elapsed()))
}

fn green_diagonal() -> Outcome {
    let start = Instant::now();
    let mut max = 0.0f64;
    for p in ["square", "triangular", "hexagonal", "paper-fig4"] {
        let g = preset(p);
        for k in [0.2, 0.5, 0.8] {
            let c = ctx(k);
            for i in 0..g.num_vertices() {
                let x = VertexRef::new(i, 1, -2);
                let v = green_local(&g, &c, x, x).unwrap().value;
                max = max.max((v - c.kp() * c.big_kp() / PI).abs());
            }
        }
    }
    outcome(max < 1e-10 && within(start.elapsed(), 1), format!("max |G(x,x) - k'K'/pi| = {max:.1e}, {:.1?}", start.elapsed()))
}

fn green_cross_method() -> Outcome {
    let start = Instant::now();
    let mut cases = Vec::new();
    for p in PRESETS {
        let g = preset(p);
        for k in [0.5, 0.8] {
            for (i, j, s) in [(0, 0, [1, 0]), (0, 0, [2, 1]), (0, g.num_vertices() - 1, [1, 2]), (0, 0, [-2, 3])] {
                let (x, y) = (VertexRef::new(i, s[0], s[1]), VertexRef::new(j, 0, 0));
                if g.distance(x, y) <= 8 {
                    cases.push((p, k, x, y));
                }
            }
        }
    }
    let results: Vec<f64> = isoradial::par::map(Exec::default(), &cases, |&(p, k, x, y)| {
        let g = preset(p);
        let c = ctx(k);
        let a = green_local(&g, &c, x, y).map(|v| v.value);
        let b = green_truncated(&g, &c, x, y, TruncationOptions::default()).map(|v| v.value);
        let f = green_fourier(Exec::Sequential, &g, &c, x.idx, y.idx, [x.cell[0] - y.cell[0], x.cell[1] - y.cell[1]], FourierOptions::default())
            .map(|v| v.value);
        match (a, b, f) {
            (Ok(a), Ok(b), Ok(f)) => (a - b).abs().max((a - f).abs()).max((b - f).abs()),
            _ => f64::INFINITY,
        }
    });
    let max = results.iter().cloned().fold(0.0, f64::max);
    let pass = cases.len() >= 20 && max < 1e-7 && within(start.elapsed(), 120);
    outcome(pass, format!("{} cases, max pairwise spread {max:.1e}, {:.1?}", cases.len(), start.elapsed()))
}

fn neighbor_forms() -> Outcome {
    let mut spread = 0.0f64;
    for k in [0.2, 0.5, 0.8, 0.95] {
        let c = ctx(k);
        for i in 1..20 {
            let tb = i as f64 * FRAC_PI_2 / 20.0;
            for ab in [0.0, 0.4, 1.7, 3.0, 5.5] {
                spread = spread.max(green_neighbor(&c, ab, tb).spread());
            }
        }
    }
    let c = ctx(1e-4);
    let limit = (1..20)
        .map(|i| {
            let tb = i as f64 * FRAC_PI_2 / 20.0;
            (diagonal_value(&c) - green_neighbor(&c, 0.3, tb).c - massless_neighbor_difference(tb)).abs()
        })
        .fold(0.0, f64::max);
    outcome(spread < 1e-10 && limit < 1e-3, format!("max spread of three forms {spread:.1e}; k=1e-4 limit error {limit:.1e}"))
}

fn harmonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut max = 0.0f64;
    for p in PRESETS {
        let g = preset(p);
        let m = Massive::new(&g, ctx(0.6));
        let (kk, kkp) = (m.ctx.big_k(), m.ctx.big_kp());
        for _ in 0..50 {
            let u = C64::new(rng.gen_range(0.0..4.0 * kk), rng.gen_range(-2.0..2.0) * kkp);
            let x = VertexRef::new(rng.gen_range(0..g.num_vertices()), rng.gen_range(-3..4), rng.gen_range(-3..4));
            let y = VertexRef::new(0, 0, 0);
            max = max.max(harmonic_residual(&m, x, y, u));
        }
    }
    outcome(max < 1e-9, format!("50 random u per preset, max relative residual {max:.1e}"))
}

/// Slope of `log G + ½ log L` against `L`, fitted with an intercept and a
/// `1/L` correction.
fn fitted_slope(g: &PeriodicGraph, c: &EllipticContext, dir: [i64; 2]) -> f64 {
    let o = VertexRef::new(0, 0, 0);
    let step = g.distance(o, o.translate(dir[0], dir[1])) as f64;
    let ts: Vec<i64> = ((20.0 / step).ceil() as i64..=(200.0 / step) as i64).collect();
    let rows: Vec<(f64, f64)> = isoradial::par::map(Exec::default(), &ts, |&t| {
        let l = step * t as f64;
        let gv = green_local(g, c, o.translate(t * dir[0], t * dir[1]), o).unwrap().value;
        (l, gv.ln() + 0.5 * l.ln())
    });
    let a = DMatrix::from_fn(rows.len(), 3, |i, j| [1.0, rows[i].0, 1.0 / rows[i].0][j]);
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    let sol = a.svd(true, true).solve(&y, 1e-14).unwrap();
    sol[1]
}

fn asymptotics() -> Outcome {
    let start = Instant::now();
    let g = preset("square");
    let c = ctx(0.5);
    let o = VertexRef::new(0, 0, 0);
    let mut ok = true;
    let mut parts = Vec::new();
    for dir in [[1, 0], [1, 1]] {
        let step = g.distance(o, o.translate(dir[0], dir[1])) as i64;
        let t = 40 / step;
        let y = o.translate(t * dir[0], t * dir[1]);
        let path = ExpPath::between(&g, &c, y, o);
        let ratio = green_local(&g, &c, y, o).unwrap().value / green_asymptotic(&c, &path).unwrap();
        let chi = saddle_point(&c, &path).unwrap().chi;
        let slope = fitted_slope(&g, &c, dir);
        let rel = (slope - chi).abs() / chi.abs();
        let amoeba = (rate_from_amoeba(&g, &c, dir).unwrap() - chi).abs();
        ok &= (0.95..=1.05).contains(&ratio) && rel < 0.01 && amoeba < 1e-3;
        parts.push(format!("{dir:?}: ratio@40 {ratio:.4}, slope {slope:.5} vs chi {chi:.5} ({:.2}%), amoeba {amoeba:.1e}", 100.0 * rel));
    }
    outcome(ok && within(start.elapsed(), 60), format!("{}; {:.1?}", parts.join("; "), start.elapsed()))
}

fn small_graphs() -> Vec<(String, FiniteGraph)> {
    let mut out = Vec::new();
    for (p, nx, ny) in [("square", 2, 2), ("square", 3, 3), ("triangular", 2, 2), ("hexagonal", 2, 2), ("square", 2, 3)] {
        out.push((format!("{p} {nx}x{ny} torus"), preset(p).torus(nx, ny).unwrap()));
    }
    for p in ["square", "paper-fig4"] {
        let g = preset(p);
        let o = VertexRef::new(0, 0, 0);
        let mut verts = g.ball(&[o], 4);
        verts.truncate(7);
        out.push((format!("{p} patch of {}", verts.len()), g.induced(&verts)));
    }
    out
}

fn matrix_forest() -> Outcome {
    let c = ctx(0.6);
    let mut worst = 0.0f64;
    let graphs = small_graphs();
    let mut n = 0;
    for (_, fg) in &graphs {
        if fg.len() > 10 {
            continue;
        }
        let z = partition_function(&c, fg).unwrap();
        worst = worst.max((z.determinant - z.enumeration).abs() / z.determinant);
        n += 1;
    }
    outcome(n >= 5 && worst < 1e-9, format!("{n} graphs with <= 10 vertices, max relative error {worst:.1e}"))
}

fn wilson_marginals() -> Outcome {
    let start = Instant::now();
    let c = ctx(0.8);
    let fg = preset("square").torus(6, 6).unwrap();
    let lap = SparseLaplacian::new(&c, &fg);
    let gm = finite_green(&lap);
    let green = |a: usize, b: usize| gm[(a, b)];
    let e = |i| FiniteEvent::Edge(i);
    let mut events: Vec<Vec<FiniteEvent>> = (0..10).map(|i| vec![e(7 * i)]).collect();
    events.extend([
        vec![e(0), e(1)],
        vec![e(0), e(2)],
        vec![e(3), e(40)],
        vec![e(5), FiniteEvent::Root(fg.edges[5].a)],
        vec![FiniteEvent::Root(0), FiniteEvent::Root(1)],
    ]);
    let samples = WilsonSampler::new(&lap, &fg, &c).sample_many(Exec::default(), 100_000, 2024);
    let n = samples.len() as f64;
    let mut worst = 0.0f64;
    for ev in &events {
        let items: Vec<Item<usize>> = ev.iter().map(|&x| isoradial::forest::finite_item(&lap, &fg, &c, x)).collect();
        let p = transfer_impedance(&items, green).unwrap().marginal().unwrap();
        let hits = samples.iter().filter(|s| ev.iter().all(|&x| s.contains(x))).count() as f64;
        let se = (p * (1.0 - p) / n).sqrt();
        worst = worst.max((hits / n - p).abs() / se);
    }
    let pass = worst < 3.0 && within(start.elapsed(), 120);
    outcome(pass, format!("{} events, 1e5 samples, worst deviation {worst:.2} standard errors, {:.1?}", events.len(), start.elapsed()))
}

fn edge_root_identity() -> Outcome {
    let mut max = 0.0f64;
    for p in PRESETS {
        let g = preset(p);
        for k in [0.1, 0.5, 0.9] {
            max = max.max((edge_root_sum(&Massive::new(&g, ctx(k))) - g.num_vertices() as f64).abs());
        }
    }
    outcome(max < 1e-9, format!("max |sum P(e) + sum P(x) - |V1|| = {max:.1e}"))
}

fn spectral_curve() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut on_curve = 0.0f64;
    let mut recip = 0.0f64;
    let mut polygons = true;
    for p in PRESETS {
        let g = preset(p);
        let c = ctx(0.55);
        let m = Massive::new(&g, c.clone());
        let cp = char_poly(Exec::default(), &m).unwrap();
        let scale = cp.coeffs.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        recip = recip.max(cp.reciprocity_residual() / scale);
        polygons &= convex_hull(&cp.support()) == newton_polygon_from_tracks(&g).unwrap();
        let curve = Curve::new(&g, &c);
        for _ in 0..50 {
            let u = C64::new(rng.gen_range(0.0..4.0 * c.big_k()), rng.gen_range(0.0..4.0 * c.big_kp()));
            let (z, w) = curve.zw(u);
            let size: f64 = cp.terms().map(|(a, b, x)| x.abs() * z.norm().powi(a as i32) * w.norm().powi(b as i32)).sum();
            on_curve = on_curve.max(cp.eval(z, w).norm() / size);
        }
    }
    let pass = on_curve < 1e-8 && polygons && recip < 1e-9;
    outcome(pass, format!("max |P(z,w)| relative {on_curve:.1e}; Newton polygons match: {polygons}; reciprocity {recip:.1e}"))
}

fn amoeba() -> Outcome {
    let g = preset("square");
    let areas: Vec<f64> = (1..=9).map(|i| hole_area(&g, &ctx(i as f64 / 10.0)).quadrature).collect();
    let increasing = areas.windows(2).all(|w| w[1] > w[0]);
    let mut origin = true;
    let mut tentacle = 0.0f64;
    for p in PRESETS {
        let g = preset(p);
        for k in [0.3, 0.6, 0.894] {
            let curve = Curve::new(&g, &ctx(k));
            origin &= winding_number(&hole_boundary(&curve, 4096), [0.0, 0.0]) != 0;
            tentacle = tentacle.max(tentacles(&curve).iter().map(|t| t.error).fold(0.0, f64::max));
        }
    }
    let pass = increasing && origin && tentacle < 0.02;
    outcome(pass, format!("hole areas increasing: {increasing}; origin in hole: {origin}; worst tentacle error {:.2}%", 100.0 * tentacle))
}

fn free_energy() -> Outcome {
    let mut fourier = 0.0f64;
    let mut limit = 0.0f64;
    for p in PRESETS {
        let g = preset(p);
        let c = ctx(0.5);
        let closed = free_energy_closed(&g, &c).0;
        let (f, _) = free_energy_fourier(Exec::default(), &Massive::new(&g, c), 1e-10).unwrap();
        fourier = fourier.max((closed - f).abs());
        limit = limit.max((free_energy_closed(&g, &ctx(1e-3)).0 - free_energy_critical(&g)).abs());
    }
    outcome(fourier < 1e-6 && limit < 1e-3, format!("closed vs Fourier {fourier:.1e}; k=1e-3 vs critical {limit:.1e}"))
}

fn phase_transition() -> Outcome {
    let start = Instant::now();
    let ks = [0.01, 0.02, 0.04, 0.06, 0.08, 0.1, 0.15, 0.2];
    let mut ok = true;
    let mut parts = Vec::new();
    for p in ["square", "paper-fig4"] {
        let g = preset(p);
        let fit = phase_expansion_check(&g, &ks).unwrap();
        let v = g.num_vertices() as f64;
        ok &= (fit.log_coefficient - v).abs() <= 0.1 * v;
        parts.push(format!("{p}: c = {:.4} (|V1| = {v}), k^2 coefficient {:.4}", fit.log_coefficient, fit.k2_coefficient));
    }
    outcome(ok && within(start.elapsed(), 180), format!("{}; {:.1?}", parts.join("; "), start.elapsed()))
}

fn z_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut yb = 0.0f64;
    for _ in 0..200 {
        let c = ctx(rng.gen_range(0.0..1.0f64).max(1e-3));
        let t = loop {
            let a = rng.gen_range(0.02..FRAC_PI_2);
            let b = rng.gen_range(0.02..FRAC_PI_2);
            if PI - a - b > 0.02 && PI - a - b < FRAC_PI_2 {
                break [a, b, PI - a - b];
            }
        };
        let outer = t.map(|x| {
            let s = rng.gen_range(0.1..0.9);
            vec![s * (PI - x), (1.0 - s) * (PI - x)]
        });
        yb = yb.max(yang_baxter_residual(&c, t, &outer).unwrap());
    }
    let g = preset("hexagonal");
    let o = VertexRef::new(0, 0, 0);
    let verts = g.ball(&[o], 7);
    let fg = g.induced(&verts);
    let x0 = verts.iter().position(|&v| v == o).unwrap();
    let mv = star_triangle(&fg, x0).unwrap();
    let mut pairs = vec![(mv.legs[0], mv.legs[1])];
    while pairs.len() < 10 {
        let (x, y) = (rng.gen_range(0..fg.len()), rng.gen_range(0..fg.len()));
        if x != x0 && y != x0 {
            pairs.push((x, y));
        }
    }
    let dev = mv.green_deviation(&ctx(0.5), &pairs);
    outcome(yb < 1e-9 && dev < 1e-8, format!("200 random stars, max relative YB residual {yb:.1e}; Green deviation after the move {dev:.1e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 14] = [
        ("elliptic identities", elliptic_identities),
        ("green diagonal", green_diagonal),
        ("green cross-method", green_cross_method),
        ("neighbor forms", neighbor_forms),
        ("harmonicity", harmonicity),
        ("asymptotics", asymptotics),
        ("matrix-forest oracle", matrix_forest),
        ("determinantal marginals", wilson_marginals),
        ("edge/root identity", edge_root_identity),
        ("spectral curve", spectral_curve),
        ("amoeba", amoeba),
        ("free energy", free_energy),
        ("phase transition", phase_transition),
        ("z-invariance", z_invariance),
    ];
    // a filter argument (as passed by `cargo test <name>`) runs matching criteria only
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut unexpected = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if let Some(f) = &filter {
            if !name.contains(f.as_str()) && f != &id.to_string() {
                continue;
            }
        }
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && KNOWN_FAILURES.contains(&id) { " (known: unattainable as stated)" } else { "" };
        println!("{tag} {id:>2} {name}: {}{note}", o.detail);
        if !o.pass && !KNOWN_FAILURES.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
