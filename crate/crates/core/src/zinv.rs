//! Star-triangle moves: the Yang-Baxter partition identities of the forest
//! model, the constant relating the two sides, the weight identities
//! behind them, and invariance of the Green function under a move.

use crate::elliptic::EllipticContext;
use crate::isograph::{FEdge, FiniteGraph};
use crate::laplacian::{conductance, elliptic_angle, mass2, SparseLaplacian};
use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ZinvError {
    #[error("vertex {0} is not an inner vertex of degree 3")]
    NotAStar(usize),
    #[error("half-angles sum to {0}, not π")]
    AngleSum(f64),
    #[error("half-angle {0} is outside (0, π/2)")]
    Angle(f64),
}

/// Which of `x₁, x₂, x₃` the outside configuration already joins to the root.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    All,
    /// All but `x_k`.
    Pair(usize),
    /// Only `x_i`.
    Single(usize),
    Empty,
}

impl Case {
    pub fn all() -> [Case; 8] {
        [Case::All, Case::Pair(0), Case::Pair(1), Case::Pair(2), Case::Single(0), Case::Single(1), Case::Single(2), Case::Empty]
    }

    pub fn connected(self, l: usize) -> bool {
        match self {
            Case::All => true,
            Case::Pair(k) => l != k,
            Case::Single(i) => l == i,
            Case::Empty => false,
        }
    }
}

impl std::fmt::Display for Case {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let set: Vec<String> = (0..3).filter(|&l| self.connected(l)).map(|l| format!("x{}", l + 1)).collect();
        write!(f, "{{{}}}", set.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Star,
    Triangle,
}

/// Local weights of a star `x₀; x₁ x₂ x₃` and of the triangle replacing it.
/// The triangle edge `x_i x_j` carries half-angle `π/2 - θ̄_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalWeights {
    /// `ρ(θ_ℓ)` on the star edges `x₀ x_ℓ`.
    pub rho: [f64; 3],
    /// `ρ(K - θ_ℓ)` on the triangle edge opposite `x_ℓ`.
    pub rho_c: [f64; 3],
    pub m0: f64,
    /// Masses of `x_ℓ` in the star graph and in the triangle graph.
    pub m: [f64; 3],
    pub mp: [f64; 3],
}

fn others(l: usize) -> (usize, usize) {
    ((l + 1) % 3, (l + 2) % 3)
}

fn check_angles(theta_bar: [f64; 3]) -> Result<(), ZinvError> {
    if let Some(&t) = theta_bar.iter().find(|&&t| !(t > 0.0 && t < FRAC_PI_2)) {
        return Err(ZinvError::Angle(t));
    }
    let s: f64 = theta_bar.iter().sum();
    if (s - PI).abs() > 1e-12 {
        return Err(ZinvError::AngleSum(s));
    }
    Ok(())
}

impl LocalWeights {
    /// `outer[ℓ]` are the half-angles at `x_ℓ` outside the star; they are the
    /// same on both sides of the move.
    pub fn new(ctx: &EllipticContext, theta_bar: [f64; 3], outer: &[Vec<f64>; 3]) -> Result<Self, ZinvError> {
        check_angles(theta_bar)?;
        let rho = theta_bar.map(|t| conductance(ctx, t));
        let rho_c = theta_bar.map(|t| conductance(ctx, FRAC_PI_2 - t));
        let m0 = mass2(ctx, &theta_bar);
        let mut m = [0.0; 3];
        let mut mp = [0.0; 3];
        for l in 0..3 {
            let (i, j) = others(l);
            let mut star = outer[l].clone();
            star.push(theta_bar[l]);
            let mut tri = outer[l].clone();
            tri.extend([FRAC_PI_2 - theta_bar[i], FRAC_PI_2 - theta_bar[j]]);
            m[l] = mass2(ctx, &star);
            mp[l] = mass2(ctx, &tri);
        }
        Ok(LocalWeights { rho, rho_c, m0, m, mp })
    }
}

/// Partition function of the local configurations completing an outside
/// configuration of type `case`, written out case by case.
pub fn yb_partition(case: Case, side: Side, w: &LocalWeights) -> f64 {
    let LocalWeights { rho: r, rho_c: c, m0, m, mp } = *w;
    let sum_r: f64 = r.iter().sum();
    match (case, side) {
        (Case::All, Side::Star) => sum_r + m0,
        (Case::All, Side::Triangle) => 1.0,
        (Case::Pair(k), Side::Star) => {
            let (i, j) = others(k);
            r[k] * (r[i] + r[j]) + m0 * r[k] + m[k] * (sum_r + m0)
        }
        (Case::Pair(k), Side::Triangle) => {
            let (i, j) = others(k);
            c[i] + c[j] + mp[k]
        }
        (Case::Single(i), Side::Star) => {
            let (j, k) = others(i);
            r[0] * r[1] * r[2]
                + m0 * r[j] * r[k]
                + m[j] * r[k] * (r[i] + r[j])
                + m[k] * r[j] * (r[i] + r[k])
                + m0 * (m[k] * r[j] + m[j] * r[k])
                + m[j] * m[k] * (sum_r + m0)
        }
        (Case::Single(i), Side::Triangle) => {
            let (j, k) = others(i);
            c[1] * c[2] + c[0] * c[2] + c[0] * c[1] + mp[j] * (c[i] + c[j]) + mp[k] * (c[i] + c[k]) + mp[j] * mp[k]
        }
        (Case::Empty, Side::Star) => {
            let prod_r = r[0] * r[1] * r[2];
            let mut z = (m0 + m[0] + m[1] + m[2]) * prod_r + m[0] * m[1] * m[2] * (sum_r + m0);
            for i in 0..3 {
                let (j, k) = others(i);
                z += m0 * m[i] * r[j] * r[k];
                z += m[j] * m[k] * r[i] * (r[j] + r[k]);
                z += m0 * m[j] * m[k] * r[i];
            }
            z
        }
        (Case::Empty, Side::Triangle) => {
            let trees = c[1] * c[2] + c[0] * c[2] + c[0] * c[1];
            let mut z = (mp[0] + mp[1] + mp[2]) * trees + mp[0] * mp[1] * mp[2];
            for i in 0..3 {
                let (j, k) = others(i);
                z += mp[j] * mp[k] * (c[j] + c[k]);
            }
            z
        }
    }
}

/// The same partition function by brute force: every subset of local edges
/// (star or triangle edges plus root edges of the local vertices) that is a
/// spanning tree once the vertices already joined to the root are merged
/// with it.
pub fn yb_partition_brute(case: Case, side: Side, w: &LocalWeights) -> f64 {
    // node 0 is the root, nodes 1..=3 are x₁..x₃ (merged with 0 if connected), 4 is x₀
    let node = |l: usize| if case.connected(l) { 0 } else { l + 1 };
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    match side {
        Side::Star => {
            edges.push((4, 0, w.m0));
            for l in 0..3 {
                edges.push((4, node(l), w.rho[l]));
                edges.push((node(l), 0, w.m[l]));
            }
        }
        Side::Triangle => {
            for l in 0..3 {
                let (i, j) = others(l);
                edges.push((node(i), node(j), w.rho_c[l]));
                edges.push((node(l), 0, w.mp[l]));
            }
        }
    }
    let mut nodes = vec![0];
    nodes.extend((0..3).filter(|&l| !case.connected(l)).map(|l| l + 1));
    if side == Side::Star {
        nodes.push(4);
    }
    let mut total = 0.0;
    for mask in 0u32..1 << edges.len() {
        if mask.count_ones() as usize != nodes.len() - 1 {
            continue;
        }
        let mut parent: [usize; 5] = [0, 1, 2, 3, 4];
        fn find(p: &mut [usize; 5], mut x: usize) -> usize {
            while p[x] != x {
                x = p[x];
            }
            x
        }
        let mut weight = 1.0;
        let mut tree = true;
        for (b, &(u, v, wt)) in edges.iter().enumerate() {
            if mask >> b & 1 == 0 {
                continue;
            }
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru == rv {
                tree = false;
                break;
            }
            parent[ru] = rv;
            weight *= wt;
        }
        if tree {
            total += weight;
        }
    }
    total
}

/// `C(k) = k' sc(θ₁) sc(θ₂) sc(θ₃)`.
pub fn zinv_constant(ctx: &EllipticContext, theta_bar: [f64; 3]) -> Result<f64, ZinvError> {
    check_angles(theta_bar)?;
    Ok(ctx.kp() * theta_bar.iter().map(|&t| conductance(ctx, t)).product::<f64>())
}

/// Residuals of `k' Π ρ(θ_ℓ) = m²(x₀) + Σ ρ(θ_ℓ)` and, for each `ℓ`, of
/// `m'²(x_ℓ) - m²(x_ℓ) = ρ(θ_ℓ) - ρ(K-θ_i) - ρ(K-θ_j) - k' ρ(K-θ_i) ρ(K-θ_j) ρ(θ_ℓ)`,
/// the mass change computed from the angle multisets.
pub fn weight_identity_residuals(ctx: &EllipticContext, theta_bar: [f64; 3]) -> Result<(f64, [f64; 3]), ZinvError> {
    let w = LocalWeights::new(ctx, theta_bar, &[vec![], vec![], vec![]])?;
    let c = zinv_constant(ctx, theta_bar)?;
    let r0 = c - w.m0 - w.rho.iter().sum::<f64>();
    let r1 = [0, 1, 2].map(|l| {
        let (i, j) = others(l);
        (w.mp[l] - w.m[l]) - (w.rho[l] - w.rho_c[i] - w.rho_c[j] - ctx.kp() * w.rho_c[i] * w.rho_c[j] * w.rho[l])
    });
    Ok((r0, r1))
}

/// Largest relative deviation of `Z_star = C Z_triangle` over the 8 cases.
pub fn yang_baxter_residual(ctx: &EllipticContext, theta_bar: [f64; 3], outer: &[Vec<f64>; 3]) -> Result<f64, ZinvError> {
    let w = LocalWeights::new(ctx, theta_bar, outer)?;
    let c = zinv_constant(ctx, theta_bar)?;
    Ok(Case::all()
        .iter()
        .map(|&case| {
            let s = yb_partition(case, Side::Star, &w);
            ((s - c * yb_partition(case, Side::Triangle, &w)) / s).abs()
        })
        .fold(0.0, f64::max))
}

/// A finite graph after replacing the star at `x0` by a triangle.
#[derive(Debug, Clone)]
pub struct StarTriangleMove {
    pub star: FiniteGraph,
    pub triangle: FiniteGraph,
    pub x0: usize,
    /// Vertex of the triangle graph for each star-graph vertex other than `x0`.
    pub map: Vec<Option<usize>>,
    /// The three neighbors of `x0` (star-graph indices).
    pub legs: [usize; 3],
}

pub fn star_triangle(g: &FiniteGraph, x0: usize) -> Result<StarTriangleMove, ZinvError> {
    let star_edges: Vec<&FEdge> = g.edges.iter().filter(|e| e.a == x0 || e.b == x0).collect();
    if star_edges.len() != 3 || !g.outer[x0].is_empty() {
        return Err(ZinvError::NotAStar(x0));
    }
    let legs = [0, 1, 2].map(|l| if star_edges[l].a == x0 { star_edges[l].b } else { star_edges[l].a });
    let theta = [0, 1, 2].map(|l| star_edges[l].theta_bar);
    check_angles(theta)?;
    let map: Vec<Option<usize>> = (0..g.len()).map(|v| (v != x0).then(|| if v < x0 { v } else { v - 1 })).collect();
    let re = |v: usize| map[v].expect("not x0");
    let mut edges: Vec<FEdge> =
        g.edges.iter().filter(|e| e.a != x0 && e.b != x0).map(|e| FEdge { a: re(e.a), b: re(e.b), theta_bar: e.theta_bar }).collect();
    for l in 0..3 {
        let (i, j) = others(l);
        edges.push(FEdge { a: re(legs[i]), b: re(legs[j]), theta_bar: FRAC_PI_2 - theta[l] });
    }
    let keep = |v: &usize| *v != x0;
    let triangle = FiniteGraph {
        pos: (0..g.len()).filter(keep).map(|v| g.pos[v]).collect(),
        edges,
        outer: (0..g.len()).filter(keep).map(|v| g.outer[v].clone()).collect(),
    };
    Ok(StarTriangleMove { star: g.clone(), triangle, x0, map, legs })
}

impl StarTriangleMove {
    /// `max |G_star(x,y) - G_triangle(x,y)|` over pairs of star-graph
    /// vertices other than `x0`.
    pub fn green_deviation(&self, ctx: &EllipticContext, pairs: &[(usize, usize)]) -> f64 {
        let ls = SparseLaplacian::new(ctx, &self.star);
        let lt = SparseLaplacian::new(ctx, &self.triangle);
        pairs
            .iter()
            .map(|&(x, y)| {
                assert!(x != self.x0 && y != self.x0, "pairs must avoid the star centre");
                let gs = crate::green::solve_column(&ls, y)[x];
                let (xt, yt) = (self.map[x].unwrap(), self.map[y].unwrap());
                let gt = crate::green::solve_column(&lt, yt)[xt];
                (gs - gt).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Extend `f` (on the triangle graph's vertices, indexed as in the star
    /// graph, value at `x0` ignored) massive-harmonically at `x0`, and return
    /// `max_ℓ |(Δ_star f)(x_ℓ) - (Δ_triangle f)(x_ℓ)|` together with the
    /// Laplacian residual at `x0`.
    pub fn consistency_residual(&self, ctx: &EllipticContext, f: &[f64]) -> (f64, f64) {
        let ls = SparseLaplacian::new(ctx, &self.star);
        let lt = SparseLaplacian::new(ctx, &self.triangle);
        let mut g = f.to_vec();
        let off: f64 = ls.rows[self.x0].iter().map(|&(j, v)| v * f[j]).sum();
        g[self.x0] = -off / ls.diag[self.x0];
        let mut ds = vec![0.0; g.len()];
        ls.matvec(&g, &mut ds);
        let ft: Vec<f64> = (0..g.len()).filter(|&v| v != self.x0).map(|v| g[v]).collect();
        let mut dt = vec![0.0; ft.len()];
        lt.matvec(&ft, &mut dt);
        let dev = self.legs.iter().map(|&x| (ds[x] - dt[self.map[x].unwrap()]).abs()).fold(0.0, f64::max);
        (dev, ds[self.x0].abs())
    }
}

/// Elliptic angle sum of a triple, `2K` for a valid star.
pub fn elliptic_angle_sum(ctx: &EllipticContext, theta_bar: [f64; 3]) -> f64 {
    theta_bar.iter().map(|&t| elliptic_angle(ctx, t)).sum()
}
