//! Rooted spanning forests weighted by `Π ρ(e) Π m²(root)`: transfer
//! impedance and marginals, Wilson's sampler on finite graphs, the
//! matrix-forest oracle, and the free energy with its behaviour at `k → 0`.

use crate::elliptic::EllipticContext;
use crate::green::diagonal_value;
use crate::isograph::{FiniteGraph, PeriodicGraph};
use crate::laplacian::{elliptic_angle, Massive, SparseLaplacian};
use crate::par::{self, Exec};
use crate::quad::tanh_sinh;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ForestError {
    #[error("item {0} appears twice")]
    Duplicate(usize),
    #[error("marginal {0:e} lies outside [0, 1]")]
    Inconsistent(f64),
    #[error("enumeration is capped at {cap} vertices, graph has {n}")]
    TooLarge { n: usize, cap: usize },
    #[error("forest invariant violated: {0}")]
    Invalid(&'static str),
    #[error("free energy grid did not settle: change {0:e}")]
    NotConverged(f64),
    #[error("Δ(z,w) is singular on the unit torus")]
    Singular,
    #[error("phase fit needs at least 6 values of k in (0, 0.2]")]
    BadGrid,
}

/// An event of the forest measure: an edge (with an arbitrary orientation)
/// is present, or a vertex is a root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Item<V> {
    Edge { tail: V, head: V, rho: f64 },
    Root { vertex: V, mass2: f64 },
}

impl<V: PartialEq> Item<V> {
    fn same(&self, other: &Self) -> bool {
        match (self, other) {
            (Item::Edge { tail: a, head: b, .. }, Item::Edge { tail: c, head: d, .. }) => (a == c && b == d) || (a == d && b == c),
            (Item::Root { vertex: a, .. }, Item::Root { vertex: b, .. }) => a == b,
            _ => false,
        }
    }
}

/// Kernel whose principal minors are the joint probabilities of the items.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferImpedance {
    pub matrix: DMatrix<f64>,
}

/// Assemble the kernel from any Green function `G(a, b)`.
pub fn transfer_impedance<V: Copy + PartialEq>(
    items: &[Item<V>],
    green: impl Fn(V, V) -> f64,
) -> Result<TransferImpedance, ForestError> {
    for (i, a) in items.iter().enumerate() {
        if items[..i].iter().any(|b| a.same(b)) {
            return Err(ForestError::Duplicate(i));
        }
    }
    let n = items.len();
    let mut m = DMatrix::zeros(n, n);
    for (i, a) in items.iter().enumerate() {
        for (j, b) in items.iter().enumerate() {
            m[(i, j)] = match (*a, *b) {
                (Item::Edge { tail: am, head: ap, .. }, Item::Edge { tail: bm, head: bp, rho }) => {
                    rho * (green(am, bm) - green(ap, bm) - green(am, bp) + green(ap, bp))
                }
                (Item::Edge { tail, head, .. }, Item::Root { vertex, mass2 }) => {
                    mass2 * (green(tail, vertex) - green(head, vertex))
                }
                (Item::Root { vertex, .. }, Item::Edge { tail, head, rho }) => rho * (green(vertex, tail) - green(vertex, head)),
                (Item::Root { vertex: x, .. }, Item::Root { vertex: y, mass2 }) => mass2 * green(x, y),
            };
        }
    }
    Ok(TransferImpedance { matrix: m })
}

impl TransferImpedance {
    /// Probability of all the items together.
    pub fn marginal(&self) -> Result<f64, ForestError> {
        self.minor(&(0..self.matrix.nrows()).collect::<Vec<_>>())
    }

    /// Probability of a subset of the items.
    pub fn minor(&self, idx: &[usize]) -> Result<f64, ForestError> {
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.matrix[(idx[i], idx[j])]);
        let p = if idx.is_empty() { 1.0 } else { sub.determinant() };
        if !(-1e-9..=1.0 + 1e-9).contains(&p) {
            return Err(ForestError::Inconsistent(p));
        }
        Ok(p)
    }
}

/// `P(e ∈ F)` for an edge of half-angle `θ̄` on an infinite graph.
pub fn edge_probability(ctx: &EllipticContext, theta_bar: f64) -> f64 {
    let t = elliptic_angle(ctx, theta_bar);
    let dn = ctx.sncndn(t.into()).2.re;
    2.0 * ctx.sc(t.into()).re * ctx.big_kp() * (ctx.kp() - dn) / PI + 2.0 * ctx.h_fn((2.0 * t).into()).re
}

/// `P(x is a root)` on an infinite graph.
pub fn root_probability(ctx: &EllipticContext, mass2: f64) -> f64 {
    mass2 * diagonal_value(ctx)
}

/// `Σ_{e ∈ E₁} P(e) + Σ_{x ∈ V₁} P(x)`, which counts `|V₁|`.
pub fn edge_root_sum(m: &Massive) -> f64 {
    let e: f64 = m.graph.edges().iter().map(|e| edge_probability(&m.ctx, e.theta_bar)).sum();
    let r: f64 = m.mass2.iter().map(|&x| root_probability(&m.ctx, x)).sum();
    e + r
}

/// Green function of a finite graph (with its killed boundary), dense.
pub fn finite_green(lap: &SparseLaplacian) -> DMatrix<f64> {
    lap.dense().try_inverse().expect("massive Laplacian is positive definite")
}

/// Items on a finite graph: edge `idx` of the graph, or a root at `v`.
pub fn finite_item(lap: &SparseLaplacian, fg: &FiniteGraph, ctx: &EllipticContext, it: FiniteEvent) -> Item<usize> {
    match it {
        FiniteEvent::Edge(i) => {
            let e = fg.edges[i];
            Item::Edge { tail: e.a, head: e.b, rho: crate::laplacian::conductance(ctx, e.theta_bar) }
        }
        FiniteEvent::Root(v) => Item::Root { vertex: v, mass2: lap.root_weight[v] },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FiniteEvent {
    Edge(usize),
    Root(usize),
}

/// Parent of a vertex in a rooted forest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Parent {
    Root,
    /// Edge index of the finite graph, leading towards the root.
    Edge(usize),
}

/// A rooted spanning forest as a parent map.
#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize)]
pub struct ForestSample {
    pub parent: Vec<Parent>,
}

impl ForestSample {
    pub fn edges(&self) -> Vec<usize> {
        self.parent.iter().filter_map(|p| if let Parent::Edge(e) = p { Some(*e) } else { None }).collect()
    }

    pub fn roots(&self) -> Vec<usize> {
        (0..self.parent.len()).filter(|&v| self.parent[v] == Parent::Root).collect()
    }

    fn step(&self, fg: &FiniteGraph, v: usize) -> Option<usize> {
        match self.parent[v] {
            Parent::Root => None,
            Parent::Edge(e) => Some(if fg.edges[e].a == v { fg.edges[e].b } else { fg.edges[e].a }),
        }
    }

    /// Root of each vertex's tree.
    pub fn components(&self, fg: &FiniteGraph) -> Vec<usize> {
        (0..self.parent.len())
            .map(|mut v| {
                while let Some(w) = self.step(fg, v) {
                    v = w;
                }
                v
            })
            .collect()
    }

    pub fn contains(&self, ev: FiniteEvent) -> bool {
        match ev {
            FiniteEvent::Root(v) => self.parent[v] == Parent::Root,
            FiniteEvent::Edge(e) => self.parent.contains(&Parent::Edge(e)),
        }
    }

    /// Parent edges are incident, no cycles, one root per tree and
    /// `#edges + #roots = #vertices`.
    pub fn check(&self, fg: &FiniteGraph) -> Result<(), ForestError> {
        let n = self.parent.len();
        if n != fg.len() {
            return Err(ForestError::Invalid("parent map has the wrong length"));
        }
        for (v, p) in self.parent.iter().enumerate() {
            if let Parent::Edge(e) = *p {
                if e >= fg.edges.len() || (fg.edges[e].a != v && fg.edges[e].b != v) {
                    return Err(ForestError::Invalid("parent edge is not incident"));
                }
            }
        }
        for v in 0..n {
            let (mut w, mut steps) = (v, 0);
            while let Some(x) = self.step(fg, w) {
                w = x;
                steps += 1;
                if steps > n {
                    return Err(ForestError::Invalid("cycle"));
                }
            }
        }
        let mut edges = self.edges();
        edges.sort_unstable();
        edges.dedup();
        if edges.len() + self.roots().len() != n {
            return Err(ForestError::Invalid("edge counted twice"));
        }
        Ok(())
    }

    /// `Π ρ(e) Π root weight`.
    pub fn weight(&self, lap: &SparseLaplacian, fg: &FiniteGraph, ctx: &EllipticContext) -> f64 {
        self.parent
            .iter()
            .enumerate()
            .map(|(v, p)| match *p {
                Parent::Root => lap.root_weight[v],
                Parent::Edge(e) => crate::laplacian::conductance(ctx, fg.edges[e].theta_bar),
            })
            .product()
    }
}

/// Wilson's algorithm with the root as an absorbing vertex: the killed walk
/// jumps along `xy` with probability `ρ/d(x)` and is absorbed with
/// probability `(root weight)/d(x)`; loops are erased.
#[derive(Debug, Clone)]
pub struct WilsonSampler {
    /// Per vertex: absorption weight, then `(neighbor, edge, cumulative weight)`.
    adj: Vec<(f64, Vec<(usize, usize, f64)>)>,
}

impl WilsonSampler {
    pub fn new(lap: &SparseLaplacian, fg: &FiniteGraph, ctx: &EllipticContext) -> Self {
        let mut adj: Vec<(f64, Vec<(usize, usize, f64)>)> = lap.root_weight.iter().map(|&r| (r, Vec::new())).collect();
        for (i, e) in fg.edges.iter().enumerate() {
            let r = crate::laplacian::conductance(ctx, e.theta_bar);
            for (a, b) in [(e.a, e.b), (e.b, e.a)] {
                let c = adj[a].1.last().map_or(adj[a].0, |x| x.2) + r;
                adj[a].1.push((b, i, c));
            }
        }
        WilsonSampler { adj }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }
    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    fn jump<R: Rng>(&self, v: usize, rng: &mut R) -> Option<(usize, usize)> {
        let (root, ref nbrs) = self.adj[v];
        let total = nbrs.last().map_or(root, |x| x.2);
        let u = rng.gen::<f64>() * total;
        if u < root {
            return None;
        }
        let i = nbrs.partition_point(|x| x.2 <= u).min(nbrs.len() - 1);
        Some((nbrs[i].0, nbrs[i].1))
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> ForestSample {
        let n = self.len();
        let mut in_tree = vec![false; n];
        let mut next: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut parent = vec![Parent::Root; n];
        for start in 0..n {
            let mut v = start;
            while !in_tree[v] {
                next[v] = self.jump(v, rng);
                match next[v] {
                    None => break,
                    Some((w, _)) => v = w,
                }
            }
            let mut v = start;
            while !in_tree[v] {
                in_tree[v] = true;
                match next[v] {
                    None => {
                        parent[v] = Parent::Root;
                        break;
                    }
                    Some((w, e)) => {
                        parent[v] = Parent::Edge(e);
                        v = w;
                    }
                }
            }
        }
        ForestSample { parent }
    }

    /// `count` samples split into batches of 4096, each with its own stream
    /// of a ChaCha8 generator seeded by `seed`.
    pub fn sample_many(&self, exec: Exec, count: usize, seed: u64) -> Vec<ForestSample> {
        const BATCH: usize = 4096;
        let batches = count.div_ceil(BATCH);
        par::map_range(exec, batches, |b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let n = BATCH.min(count - b * BATCH);
            (0..n).map(|_| self.sample(&mut rng)).collect::<Vec<_>>()
        })
        .into_iter()
        .flatten()
        .collect()
    }
}

/// Every rooted spanning forest, as acyclic parent maps: each vertex picks
/// an incident edge towards its root, or is a root.
pub fn enumerate_forests(fg: &FiniteGraph, cap: usize) -> Result<Vec<ForestSample>, ForestError> {
    let n = fg.len();
    if n > cap {
        return Err(ForestError::TooLarge { n, cap });
    }
    let mut inc: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (i, e) in fg.edges.iter().enumerate() {
        inc[e.a].push((i, e.b));
        inc[e.b].push((i, e.a));
    }
    let mut out = Vec::new();
    let mut target: Vec<Option<usize>> = vec![None; n];
    let mut parent = vec![Parent::Root; n];
    fn reaches(target: &[Option<usize>], mut w: usize, v: usize, assigned: usize) -> bool {
        // follow already-assigned parents from w; a cycle closes iff v is met
        loop {
            if w == v {
                return true;
            }
            if w >= assigned {
                return false;
            }
            match target[w] {
                Some(x) => w = x,
                None => return false,
            }
        }
    }
    fn rec(
        v: usize,
        inc: &[Vec<(usize, usize)>],
        target: &mut Vec<Option<usize>>,
        parent: &mut Vec<Parent>,
        out: &mut Vec<ForestSample>,
    ) {
        let n = inc.len();
        if v == n {
            out.push(ForestSample { parent: parent.clone() });
            return;
        }
        target[v] = None;
        parent[v] = Parent::Root;
        rec(v + 1, inc, target, parent, out);
        for &(e, w) in &inc[v] {
            if reaches(target, w, v, v) {
                continue;
            }
            target[v] = Some(w);
            parent[v] = Parent::Edge(e);
            rec(v + 1, inc, target, parent, out);
        }
        target[v] = None;
        parent[v] = Parent::Root;
    }
    rec(0, &inc, &mut target, &mut parent, &mut out);
    Ok(out)
}

/// The partition function as `det Δ` and as a sum over forests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionFunction {
    pub determinant: f64,
    pub enumeration: f64,
    pub forests: usize,
}

pub fn partition_function(ctx: &EllipticContext, fg: &FiniteGraph) -> Result<PartitionFunction, ForestError> {
    let lap = SparseLaplacian::new(ctx, fg);
    let forests = enumerate_forests(fg, 12)?;
    let enumeration = forests.iter().map(|f| f.weight(&lap, fg, ctx)).sum();
    Ok(PartitionFunction { determinant: lap.dense().determinant(), enumeration, forests: forests.len() })
}

/// Free energy per fundamental domain from the angles, in both forms that
/// differ by an integration by parts: `(form one, form two)`.
pub fn free_energy_closed(g: &PeriodicGraph, ctx: &EllipticContext) -> (f64, f64) {
    let kk = ctx.big_k();
    let log_sc = |t: f64| ctx.sc(t.into()).re.ln();
    let hp = |t: f64| ctx.h_prime((2.0 * t).into()).re;
    let h = |t: f64| ctx.h_fn((2.0 * t).into()).re;
    // (log sc)' = dn / (sn cn)
    let dlog_sc = |t: f64| {
        let (s, c, d) = ctx.sncndn(t.into());
        (d / (s * c)).re
    };
    let tol = 1e-13;
    let vertex = -(g.num_vertices() as f64) * tanh_sinh(|t| 4.0 * hp(t) * log_sc(t), 0.0, kk, tol);
    let mut one = vertex;
    let mut two = vertex;
    for e in g.edges() {
        let te = elliptic_angle(ctx, e.theta_bar);
        one -= tanh_sinh(|t| 2.0 * h(t) * dlog_sc(t), 0.0, te, tol);
        two += -2.0 * h(te) * log_sc(te) + tanh_sinh(|t| 4.0 * hp(t) * log_sc(t), 0.0, te, tol);
    }
    (one, two)
}

/// `-∬ log det Δ(z,w)` over the unit torus, grid doubled until it settles.
pub fn free_energy_fourier(exec: Exec, m: &Massive, tol: f64) -> Result<(f64, usize), ForestError> {
    let logdet = |i: usize, j: usize, n: usize| -> f64 {
        let z = C64::from_polar(1.0, 2.0 * PI * i as f64 / n as f64);
        let w = C64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
        let d = m.fourier(z, w).determinant().re;
        if d > 0.0 { d.ln() } else { f64::NAN }
    };
    let sum = |n: usize, odd_only: bool| -> f64 {
        par::map_range(exec, n, |i| {
            (0..n).filter(|&j| !odd_only || i % 2 == 1 || j % 2 == 1).map(|j| logdet(i, j, n)).sum::<f64>()
        })
        .into_iter()
        .sum()
    };
    let mut n = 8;
    let mut acc = sum(n, false);
    let mut prev = -acc / (n * n) as f64;
    let mut change = f64::INFINITY;
    while n < 2048 {
        n *= 2;
        acc += sum(n, true);
        let cur = -acc / (n * n) as f64;
        if !cur.is_finite() {
            return Err(ForestError::Singular);
        }
        change = (cur - prev).abs();
        if change < tol {
            return Ok((cur, n));
        }
        prev = cur;
    }
    Err(ForestError::NotConverged(change))
}

/// `L(x) = -∫₀ˣ log(2 sin t) dt`.
pub fn lobachevsky(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    -tanh_sinh(|t| (2.0 * t.sin()).ln(), 0.0, x, 1e-14)
}

/// Critical (`k = 0`) free energy from the half-angles.
pub fn free_energy_critical(g: &PeriodicGraph) -> f64 {
    g.edges()
        .iter()
        .map(|e| {
            let t = e.theta_bar;
            -(2.0 / PI) * (lobachevsky(t) + lobachevsky(PI / 2.0 - t)) - 2.0 * t / PI * t.tan().ln()
        })
        .sum()
}

/// `S̃ = -F - Σ_e 2H(2θ_e) log ρ(θ_e)`.
pub fn twisted_entropy(g: &PeriodicGraph, ctx: &EllipticContext) -> f64 {
    let f = free_energy_closed(g, ctx).0;
    -f - g
        .edges()
        .iter()
        .map(|e| {
            let t = elliptic_angle(ctx, e.theta_bar);
            2.0 * ctx.h_fn((2.0 * t).into()).re * ctx.sc(t.into()).re.ln()
        })
        .sum::<f64>()
}

/// Least-squares fit of `F^k - F⁰ = -c k² log k⁻¹ + b k²`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PhaseFit {
    /// Coefficient `c` of `-k² log k⁻¹`; the theory predicts `|V₁|`.
    pub log_coefficient: f64,
    pub k2_coefficient: f64,
    pub max_residual: f64,
}

pub fn phase_expansion_check(g: &PeriodicGraph, ks: &[f64]) -> Result<PhaseFit, ForestError> {
    if ks.len() < 6 || ks.iter().any(|&k| !(k > 0.0 && k <= 0.2)) {
        return Err(ForestError::BadGrid);
    }
    let f0 = free_energy_critical(g);
    let rows: Vec<(f64, f64, f64)> = ks
        .iter()
        .map(|&k| {
            let ctx = EllipticContext::new(k).expect("k in (0, 0.2]");
            (-k * k * (1.0 / k).ln(), k * k, free_energy_closed(g, &ctx).0 - f0)
        })
        .collect();
    let a = DMatrix::from_fn(rows.len(), 2, |i, j| if j == 0 { rows[i].0 } else { rows[i].1 });
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.2));
    let sol = a.clone().svd(true, true).solve(&y, 1e-14).map_err(|_| ForestError::BadGrid)?;
    let max_residual = (a * &sol - y).amax();
    Ok(PhaseFit { log_coefficient: sol[0], k2_coefficient: sol[1], max_residual })
}
