use crate::svg::Plot;
use crate::{parse, CliError, Command, Config, Table};
use isoradial::asymptotics::{green_asymptotic, rate_from_amoeba, saddle_point};
use isoradial::elliptic::{identity_residuals, EllipticContext};
use isoradial::expfun::ExpPath;
use isoradial::forest::{
    edge_probability, edge_root_sum, finite_green, finite_item, free_energy_closed, free_energy_critical,
    free_energy_fourier, partition_function, phase_expansion_check, root_probability, transfer_impedance, FiniteEvent,
    ForestSample, Parent, WilsonSampler,
};
use isoradial::green::{diagonal_value, green, green_local, green_neighbor, green_truncated, Method, TruncationOptions};
use isoradial::isograph::{FiniteGraph, PeriodicGraph, VertexRef};
use isoradial::laplacian::{Massive, SparseLaplacian};
use isoradial::par::{self, Exec};
use isoradial::spectral::{amoeba_sample, char_poly, convex_hull, hole_area, newton_polygon_from_tracks, tentacles, tentacles_ccw, Curve};
use isoradial::zinv::{
    star_triangle, weight_identity_residuals, yang_baxter_residual, yb_partition, yb_partition_brute, zinv_constant, Case,
    LocalWeights, Side,
};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Run a subcommand. A returned violation is reported after the table is
/// written.
pub fn run(cfg: &Config, cmd: &Command) -> Result<(Table, Option<String>), CliError> {
    let ok = |t: Table| Ok((t, None));
    match cmd {
        Command::Green { pairs, method, oracle } => ok(green_table(cfg, pairs, method, *oracle)?),
        Command::Asymptotics { dirs, length } => ok(asymptotics(cfg, dirs, *length)?),
        Command::SampleForest { torus, count } => ok(sample_forest(cfg, torus, *count)?),
        Command::Marginals { torus, samples } => ok(marginals(cfg, torus, *samples)?),
        Command::Amoeba { grid } => ok(amoeba(cfg, *grid)?),
        Command::Spectral => ok(spectral(cfg)?),
        Command::FreeEnergy { tol } => ok(free_energy(cfg, *tol)?),
        Command::PhaseScan { ks } => ok(phase_scan(cfg, ks)?),
        Command::CheckZinv { angles } => check_zinv(cfg, angles),
        Command::Selftest => selftest(cfg),
    }
}

/// Table cell text. Floats use the shortest round-trip form, switching to
/// exponent notation away from order one.
trait Cell {
    fn cell(&self) -> String;
}

impl Cell for f64 {
    fn cell(&self) -> String {
        let a = self.abs();
        if a != 0.0 && a.is_finite() && !(1e-4..1e6).contains(&a) {
            format!("{self:e}")
        } else {
            self.to_string()
        }
    }
}

macro_rules! display_cell {
    ($($t:ty),*) => {$(
        impl Cell for $t {
            fn cell(&self) -> String {
                self.to_string()
            }
        }
    )*};
}
display_cell!(usize, u32, u64, i64, bool, &str, String, Method, Case);

fn s<T: Cell>(x: T) -> String {
    x.cell()
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

fn finite_torus(cfg: &Config, spec: &str) -> Result<FiniteGraph, CliError> {
    let (nx, ny) = parse::torus(spec).map_err(invalid)?;
    Ok(cfg.graph.torus(nx, ny)?)
}

fn green_table(cfg: &Config, pairs: &str, method: &str, oracle: bool) -> Result<Table, CliError> {
    let ctx = cfg.ctx()?;
    let method: Method = method.parse()?;
    let pairs = parse::pairs(pairs).map_err(invalid)?;
    let n = cfg.graph.num_vertices();
    if let Some((x, y)) = pairs.iter().find(|(x, y)| x.idx >= n || y.idx >= n) {
        return Err(invalid(format!("pair {x:?}:{y:?}: the graph has {n} vertices per domain")));
    }
    let g = &cfg.graph;
    let results = par::map(Exec::default(), &pairs, |&(x, y)| {
        let v = green(method, g, &ctx, x, y)?;
        let o = if oracle { Some(green_truncated(g, &ctx, x, y, TruncationOptions::default())?) } else { None };
        Ok::<_, CliError>((v, o))
    });
    let mut header = vec!["x_idx", "x_a", "x_b", "y_idx", "y_a", "y_b", "distance", "method", "value", "imag", "size", "delta"];
    if oracle {
        header.extend(["oracle", "oracle_delta", "difference"]);
    }
    let mut t = Table::new("green", &header);
    for (&(x, y), r) in pairs.iter().zip(results) {
        let (v, o) = r?;
        let mut row = vec![s(x.idx), s(x.cell[0]), s(x.cell[1]), s(y.idx), s(y.cell[0]), s(y.cell[1])];
        row.extend([s(g.distance(x, y)), s(v.method), s(v.value), s(v.imag), s(v.size), s(v.delta)]);
        if let Some(o) = o {
            row.extend([s(o.value), s(o.delta), s((v.value - o.value).abs())]);
        }
        t.push(row);
    }
    Ok(t)
}

fn asymptotics(cfg: &Config, dirs: &str, length: i64) -> Result<Table, CliError> {
    if length < 1 {
        return Err(invalid("length must be at least 1"));
    }
    let ctx = cfg.ctx()?;
    let dirs = parse::directions(dirs).map_err(invalid)?;
    let g = &cfg.graph;
    let o = VertexRef::new(0, 0, 0);
    let rows = par::map(Exec::default(), &dirs, |&[a, b]| {
        let y = o.translate(length * a, length * b);
        let path = ExpPath::between(g, &ctx, o, y);
        let sd = saddle_point(&ctx, &path)?;
        let asym = green_asymptotic(&ctx, &path)?;
        let exact = green_local(g, &ctx, y, o)?;
        let rate = rate_from_amoeba(g, &ctx, [a, b])?;
        let prefactor = asym / (path.len() as f64 * sd.chi).exp();
        Ok::<_, CliError>(vec![
            s(a),
            s(b),
            s(path.len()),
            s(sd.u0),
            s(sd.chi),
            s(sd.chi2),
            s(rate),
            s(prefactor),
            s(asym),
            s(exact.value),
            s(exact.value / asym),
            s(exact.delta),
        ])
    });
    let mut t = Table::new(
        "asymptotics",
        &["dir_a", "dir_b", "distance", "u0", "chi", "chi2", "rate_amoeba", "prefactor", "asymptotic", "green", "ratio", "green_delta"],
    );
    for r in rows {
        t.push(r?);
    }
    Ok(t)
}

#[derive(serde::Serialize)]
struct ForestJson<'a> {
    graph: &'a str,
    k: f64,
    seed: u64,
    sample: usize,
    positions: Vec<[f64; 2]>,
    edges: Vec<[usize; 2]>,
    roots: Vec<usize>,
    parent: &'a [Parent],
}

fn xy(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn forest_svg(fg: &FiniteGraph, f: &ForestSample, title: &str) -> String {
    let mut plot = Plot::fitting(fg.pos.iter().map(|&z| xy(z)));
    // edges that wrap around the torus are not drawn
    let short = |a: usize, b: usize| (fg.pos[a] - fg.pos[b]).norm() <= 2.0 + 1e-9;
    for e in &fg.edges {
        if short(e.a, e.b) {
            plot.line(xy(fg.pos[e.a]), xy(fg.pos[e.b]), "#d0d0d0", 1.0);
        }
    }
    for i in f.edges() {
        let e = fg.edges[i];
        if short(e.a, e.b) {
            plot.line(xy(fg.pos[e.a]), xy(fg.pos[e.b]), "black", 3.0);
        }
    }
    for r in f.roots() {
        plot.dot(xy(fg.pos[r]), 5.0, "crimson");
    }
    plot.finish(title)
}

fn sample_forest(cfg: &Config, torus: &str, count: usize) -> Result<Table, CliError> {
    let ctx = cfg.ctx()?;
    let fg = finite_torus(cfg, torus)?;
    let lap = SparseLaplacian::new(&ctx, &fg);
    let samples = WilsonSampler::new(&lap, &fg, &ctx).sample_many(Exec::default(), count, cfg.seed);
    let dir = cfg.artifact_dir()?;
    let mut t = Table::new("forests", &["sample", "vertices", "edges", "roots", "largest_component", "log_weight", "json", "svg"]);
    for (i, f) in samples.iter().enumerate() {
        f.check(&fg)?;
        let doc = ForestJson {
            graph: &cfg.graph_name,
            k: ctx.k(),
            seed: cfg.seed,
            sample: i,
            positions: fg.pos.iter().map(|&z| xy(z)).collect(),
            edges: f.edges().into_iter().map(|e| [fg.edges[e].a, fg.edges[e].b]).collect(),
            roots: f.roots(),
            parent: &f.parent,
        };
        let (json, svg) = (format!("forest_{i}.json"), format!("forest_{i}.svg"));
        std::fs::write(dir.join(&json), serde_json::to_string_pretty(&doc)? + "\n")?;
        let title = format!("rooted spanning forest {i}, {} k = {}", cfg.graph_name, ctx.k());
        std::fs::write(dir.join(&svg), forest_svg(&fg, f, &title))?;
        let comp = f.components(&fg);
        let mut sizes = vec![0usize; fg.len()];
        for r in comp {
            sizes[r] += 1;
        }
        t.push(vec![
            s(i),
            s(fg.len()),
            s(doc.edges.len()),
            s(doc.roots.len()),
            s(sizes.iter().max().copied().unwrap_or(0)),
            s(f.weight(&lap, &fg, &ctx).ln()),
            json,
            svg,
        ]);
    }
    Ok(t)
}

fn marginals(cfg: &Config, torus: &str, samples: usize) -> Result<Table, CliError> {
    let ctx = cfg.ctx()?;
    let fg = finite_torus(cfg, torus)?;
    let lap = SparseLaplacian::new(&ctx, &fg);
    let gm = finite_green(&lap);
    let mut events: Vec<FiniteEvent> = (0..fg.edges.len()).map(FiniteEvent::Edge).collect();
    events.extend((0..fg.len()).map(FiniteEvent::Root));
    let mut counts = vec![0usize; events.len()];
    if samples > 0 {
        for f in WilsonSampler::new(&lap, &fg, &ctx).sample_many(Exec::default(), samples, cfg.seed) {
            for (c, &ev) in counts.iter_mut().zip(&events) {
                *c += f.contains(ev) as usize;
            }
        }
    }
    let mut t = Table::new("marginals", &["item", "index", "parameter", "method", "torus", "plane", "empirical", "std_error"]);
    for (&ev, &c) in events.iter().zip(&counts) {
        let item = finite_item(&lap, &fg, &ctx, ev);
        let p = transfer_impedance(&[item], |a, b| gm[(a, b)])?.marginal()?;
        let (kind, idx, param, plane) = match ev {
            FiniteEvent::Edge(i) => ("edge", i, fg.edges[i].theta_bar, edge_probability(&ctx, fg.edges[i].theta_bar)),
            FiniteEvent::Root(v) => ("root", v, lap.root_weight[v], root_probability(&ctx, lap.root_weight[v])),
        };
        let (emp, se) = if samples > 0 {
            let q = c as f64 / samples as f64;
            (s(q), s((q * (1.0 - q) / samples as f64).sqrt()))
        } else {
            (String::new(), String::new())
        };
        t.push(vec![s(kind), s(idx), s(param), s("transfer-impedance"), s(p), s(plane), emp, se]);
    }
    Ok(t)
}

/// Split a boundary into pieces that stay inside a box, so tentacles
/// running off to infinity are not joined across the picture.
fn clipped_runs(pts: &[[f64; 2]], lo: [f64; 2], hi: [f64; 2]) -> Vec<Vec<[f64; 2]>> {
    let inside = |p: &[f64; 2]| (0..2).all(|i| p[i] >= lo[i] && p[i] <= hi[i]);
    let mut runs = vec![Vec::new()];
    for p in pts {
        if inside(p) {
            runs.last_mut().unwrap().push(*p);
        } else if !runs.last().unwrap().is_empty() {
            runs.push(Vec::new());
        }
    }
    runs.retain(|r| r.len() > 1);
    runs
}

fn amoeba(cfg: &Config, grid: usize) -> Result<Table, CliError> {
    if grid < 4 {
        return Err(invalid("grid must be at least 4"));
    }
    let ctx = cfg.ctx()?;
    let g = &cfg.graph;
    let sample = amoeba_sample(Exec::default(), g, &ctx, grid);
    let curve = Curve::new(g, &ctx);
    let tent = tentacles(&curve);
    let area = hole_area(g, &ctx);
    let dir = cfg.artifact_dir()?;

    let mut pts = Table::new("amoeba_points", &["kind", "log_abs_z", "log_abs_w"]);
    for (kind, list) in [("scatter", &sample.scatter), ("outer", &sample.outer), ("hole", &sample.hole)] {
        for p in list.iter() {
            pts.push(vec![s(kind), s(p[0]), s(p[1])]);
        }
    }
    std::fs::write(dir.join("amoeba.csv"), pts.to_csv()?)?;
    let mut tt = Table::new("tentacles", &["u", "direction_x", "direction_y", "expected_x", "expected_y", "error"]);
    for x in &tent {
        tt.push(vec![s(x.u), s(x.direction[0]), s(x.direction[1]), s(x.expected[0]), s(x.expected[1]), s(x.error)]);
    }
    tt.save(&dir)?;

    let plot = Plot::fitting(sample.scatter.iter().copied().chain(sample.hole.iter().copied()));
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &sample.scatter {
        for i in 0..2 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    let mut plot = plot;
    for p in &sample.scatter {
        plot.dot(*p, 1.2, "#7a9cc6");
    }
    for run in clipped_runs(&sample.outer, lo, hi) {
        plot.polyline(&run, "#1f3b73", false);
    }
    plot.polyline(&sample.hole, "crimson", true);
    let title = format!("amoeba of the spectral curve, {} k = {}", cfg.graph_name, ctx.k());
    std::fs::write(dir.join("amoeba.svg"), plot.finish(&title))?;

    let max_err = tent.iter().map(|x| x.error).fold(0.0, f64::max);
    let mut t = Table::new("amoeba_summary", &["quantity", "value", "method"]);
    t.push(vec![s("hole_area"), s(area.quadrature), s("gauss-legendre")]);
    t.push(vec![s("hole_area"), s(area.shoelace), s("shoelace")]);
    t.push(vec![s("hole_area"), s(sample.hole_area), s("shoelace-sampled")]);
    t.push(vec![s("tentacles"), s(tent.len()), s("secant")]);
    t.push(vec![s("max_tentacle_error"), s(max_err), s("secant")]);
    t.push(vec![s("tentacles_ccw"), s(tentacles_ccw(&tent)), s("secant")]);
    t.push(vec![s("scatter_points"), s(sample.scatter.len()), s("torus-grid")]);
    Ok(t)
}

fn spectral(cfg: &Config) -> Result<Table, CliError> {
    let ctx = cfg.ctx()?;
    let m = Massive::new(&cfg.graph, ctx);
    let cp = char_poly(Exec::default(), &m)?;
    let hull = convex_hull(&cp.support());
    let tracks = newton_polygon_from_tracks(&cfg.graph)?;
    let fmt = |p: &[[i64; 2]]| p.iter().map(|v| format!("({},{})", v[0], v[1])).collect::<Vec<_>>().join(" ");
    eprintln!("newton polygon (support hull): {}", fmt(&hull));
    eprintln!("newton polygon (tracks):       {}", fmt(&tracks));
    eprintln!("reciprocity residual: {:e}", cp.reciprocity_residual());
    if let Some(dir) = &cfg.out {
        let mut pt = Table::new("polygon", &["source", "i", "j"]);
        for (src, poly) in [("support-hull", &hull), ("tracks", &tracks)] {
            for v in poly.iter() {
                pt.push(vec![s(src), s(v[0]), s(v[1])]);
            }
        }
        pt.save(dir)?;
    }
    let mut t = Table::new("char_poly", &["i", "j", "coefficient"]);
    for (i, j, c) in cp.terms() {
        t.push(vec![s(i), s(j), s(c)]);
    }
    Ok(t)
}

fn free_energy(cfg: &Config, tol: f64) -> Result<Table, CliError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(invalid("tol must be positive"));
    }
    let ctx = cfg.ctx()?;
    let (one, two) = free_energy_closed(&cfg.graph, &ctx);
    let (fourier, n) = free_energy_fourier(Exec::default(), &Massive::new(&cfg.graph, ctx), tol)?;
    let mut t = Table::new("free_energy", &["method", "value", "grid", "delta"]);
    t.push(vec![s("closed-form"), s(one), s(0usize), s((one - two).abs())]);
    t.push(vec![s("closed-form-by-parts"), s(two), s(0usize), s((one - two).abs())]);
    t.push(vec![s("fourier"), s(fourier), s(n), s(tol)]);
    t.push(vec![s("difference"), s((one - fourier).abs()), s(n), s("")]);
    t.push(vec![s("critical"), s(free_energy_critical(&cfg.graph)), s(0usize), s("")]);
    Ok(t)
}

fn phase_scan(cfg: &Config, ks: &str) -> Result<Table, CliError> {
    let ks = parse::numbers(ks).map_err(invalid)?;
    let g = &cfg.graph;
    let fit = phase_expansion_check(g, &ks)?;
    let f0 = free_energy_critical(g);
    let v = g.num_vertices() as f64;
    eprintln!(
        "fit F(k) - F(0) = -c k^2 log(1/k) + b k^2: c = {} (expected {v}), b = {}, max residual {:e}",
        fit.log_coefficient, fit.k2_coefficient, fit.max_residual
    );
    if let Some(dir) = &cfg.out {
        std::fs::write(dir.join("phase_fit.json"), serde_json::to_string_pretty(&fit)? + "\n")?;
    }
    let mut t = Table::new("phase_scan", &["k", "free_energy", "difference", "fitted", "minus_quarter_v_k2"]);
    for &k in &ks {
        let f = free_energy_closed(g, &EllipticContext::new(k)?).0;
        let fitted = -fit.log_coefficient * k * k * (1.0 / k).ln() + fit.k2_coefficient * k * k;
        t.push(vec![s(k), s(f), s(f - f0), s(fitted), s(-0.25 * v * k * k)]);
    }
    Ok(t)
}

fn check_zinv(cfg: &Config, angles: &str) -> Result<(Table, Option<String>), CliError> {
    let ctx = cfg.ctx()?;
    let a = parse::numbers(angles).map_err(invalid)?;
    let theta: [f64; 3] = a.try_into().map_err(|_| invalid("need exactly three half-angles"))?;
    // each leg gets two further edges splitting the remaining angle evenly
    let outer = theta.map(|x| vec![0.5 * (PI - x), 0.5 * (PI - x)]);
    let w = LocalWeights::new(&ctx, theta, &outer)?;
    let c = zinv_constant(&ctx, theta)?;
    let (r0, r1) = weight_identity_residuals(&ctx, theta)?;
    eprintln!("constant C = {c}; weight identities: centre {r0:e}, legs {:e} {:e} {:e}", r1[0], r1[1], r1[2]);
    let mut t = Table::new(
        "zinv",
        &["case", "star", "triangle", "constant_times_triangle", "star_enumerated", "triangle_enumerated", "relative_residual"],
    );
    let mut worst = 0.0f64;
    for case in Case::all() {
        let st = yb_partition(case, Side::Star, &w);
        let tr = yb_partition(case, Side::Triangle, &w);
        let res = ((st - c * tr) / st).abs();
        worst = worst.max(res);
        t.push(vec![
            s(case),
            s(st),
            s(tr),
            s(c * tr),
            s(yb_partition_brute(case, Side::Star, &w)),
            s(yb_partition_brute(case, Side::Triangle, &w)),
            s(res),
        ]);
    }
    let fail = (worst > 1e-8 || r0.abs() > 1e-8).then(|| format!("star-triangle identity (residual {worst:e})"));
    Ok((t, fail))
}

type Check = (&'static str, fn(&EllipticContext) -> Result<(bool, String), CliError>);

fn selftest(cfg: &Config) -> Result<(Table, Option<String>), CliError> {
    let ctx = cfg.ctx()?;
    let checks: [Check; 10] = [
        ("elliptic-identities", |c| {
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            let mut worst = 0.0f64;
            for _ in 0..50 {
                let mut pick = || C64::new(rng.gen_range(-2.0..2.0) * c.big_k(), rng.gen_range(-0.45..0.45) * c.big_kp());
                let (u, v) = (pick(), pick());
                worst = identity_residuals(c, u, v).iter().fold(worst, |a, r| a.max(r.1));
            }
            Ok((worst < 1e-11, format!("max residual {worst:.1e}")))
        }),
        ("green-diagonal", |c| {
            let g = PeriodicGraph::preset("square")?;
            let o = VertexRef::new(0, 0, 0);
            let d = (green_local(&g, c, o, o)?.value - diagonal_value(c)).abs();
            Ok((d < 1e-10, format!("|G(x,x) - k'K'/pi| = {d:.1e}")))
        }),
        ("green-local-vs-truncated", |c| {
            let g = PeriodicGraph::preset("square")?;
            let (x, y) = (VertexRef::new(0, 0, 0), VertexRef::new(0, 3, 2));
            let d = (green_local(&g, c, x, y)?.value - green_truncated(&g, c, x, y, TruncationOptions::default())?.value).abs();
            Ok((d < 1e-7, format!("difference {d:.1e}")))
        }),
        ("neighbor-forms", |c| {
            let mut worst = 0.0f64;
            for p in isoradial::isograph::PRESETS {
                for e in PeriodicGraph::preset(p)?.edges() {
                    worst = worst.max(green_neighbor(c, e.alpha_bar, e.theta_bar).spread());
                }
            }
            Ok((worst < 1e-10, format!("max spread {worst:.1e}")))
        }),
        ("matrix-forest", |c| {
            let g = PeriodicGraph::preset("hexagonal")?;
            let o = VertexRef::new(0, 0, 0);
            let mut verts = g.ball(&[o], 3);
            verts.truncate(8);
            let z = partition_function(c, &g.induced(&verts))?;
            let rel = (z.determinant - z.enumeration).abs() / z.determinant;
            Ok((rel < 1e-10, format!("{} forests, relative error {rel:.1e}", z.forests)))
        }),
        ("wilson-forests", |c| {
            let fg = PeriodicGraph::preset("triangular")?.torus(4, 4)?;
            let lap = SparseLaplacian::new(c, &fg);
            let bad = WilsonSampler::new(&lap, &fg, c).sample_many(Exec::default(), 200, 5).iter().filter(|f| f.check(&fg).is_err()).count();
            Ok((bad == 0, format!("{bad} of 200 samples invalid")))
        }),
        ("edge-root-sum", |c| {
            let mut worst = 0.0f64;
            for p in isoradial::isograph::PRESETS {
                let g = PeriodicGraph::preset(p)?;
                worst = worst.max((edge_root_sum(&Massive::new(&g, c.clone())) - g.num_vertices() as f64).abs());
            }
            Ok((worst < 1e-9, format!("max deviation {worst:.1e}")))
        }),
        ("newton-polygon", |c| {
            let mut all = true;
            for p in isoradial::isograph::PRESETS {
                let g = PeriodicGraph::preset(p)?;
                let cp = char_poly(Exec::default(), &Massive::new(&g, c.clone()))?;
                all &= convex_hull(&cp.support()) == newton_polygon_from_tracks(&g)?;
            }
            Ok((all, format!("support hull equals track polygon: {all}")))
        }),
        ("free-energy", |c| {
            let g = PeriodicGraph::preset("square")?;
            let (one, two) = free_energy_closed(&g, c);
            let (f, _) = free_energy_fourier(Exec::default(), &Massive::new(&g, c.clone()), 1e-10)?;
            let d = (one - f).abs().max((one - two).abs());
            Ok((d < 1e-6, format!("closed vs Fourier {d:.1e}")))
        }),
        ("star-triangle", |c| {
            let theta = [0.7, 1.1, PI - 1.8];
            let outer = theta.map(|x| vec![0.4 * (PI - x), 0.6 * (PI - x)]);
            let yb = yang_baxter_residual(c, theta, &outer)?;
            let g = PeriodicGraph::preset("hexagonal")?;
            let o = VertexRef::new(0, 0, 0);
            let verts = g.ball(&[o], 5);
            let mv = star_triangle(&g.induced(&verts), 0)?;
            let pairs: Vec<(usize, usize)> = (1..6).flat_map(|a| (1..6).map(move |b| (a, b))).collect();
            let dev = mv.green_deviation(c, &pairs);
            Ok((yb < 1e-9 && dev < 1e-10, format!("partition residual {yb:.1e}; Green deviation {dev:.1e}")))
        }),
    ];
    let mut t = Table::new("selftest", &["check", "status", "detail"]);
    let mut first = None;
    for (name, f) in checks {
        let (pass, detail) = match f(&ctx) {
            Ok(r) => r,
            Err(e) => (false, e.to_string()),
        };
        if !pass && first.is_none() {
            first = Some(format!("{name}: {detail}"));
        }
        t.push(vec![s(name), s(if pass { "PASS" } else { "FAIL" }), detail]);
    }
    Ok((t, first))
}
