//! The massive Laplacian: conductances `sc(θ)`, masses `Σ (A(θ) - sc(θ))`
//! and diagonal `Σ A(θ)`, on periodic graphs, finite pieces and in Fourier
//! form.

use crate::elliptic::EllipticContext;
use crate::isograph::{FiniteGraph, PeriodicGraph, VertexRef};
use crate::quad::gauss_composite;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::collections::HashMap;
use std::f64::consts::PI;

/// Elliptic angle `θ = 2Kθ̄/π` of a half-angle.
pub fn elliptic_angle(ctx: &EllipticContext, theta_bar: f64) -> f64 {
    theta_bar * 2.0 * ctx.big_k() / PI
}

/// Conductance `ρ(θ̄) = sc(θ)`.
pub fn conductance(ctx: &EllipticContext, theta_bar: f64) -> f64 {
    ctx.sc(elliptic_angle(ctx, theta_bar).into()).re
}

/// `A(θ)` at the elliptic angle of `θ̄`.
pub fn a_term(ctx: &EllipticContext, theta_bar: f64) -> f64 {
    ctx.a_fn(elliptic_angle(ctx, theta_bar).into()).re
}

/// `A(θ) - sc(θ)`, the contribution of one edge to the mass of an
/// endpoint. Integrated from `(A - sc)' = k² dn/(k'(dn + k')) - (K-E)/(k'K)`,
/// which keeps full relative accuracy as `k → 0` where the vertex masses
/// are `O(k⁴)`.
pub fn edge_mass(ctx: &EllipticContext, theta_bar: f64) -> f64 {
    let (k, kp) = (ctx.k(), ctx.kp());
    let t = elliptic_angle(ctx, theta_bar);
    if t == 0.0 {
        return 0.0;
    }
    let frac = gauss_composite(
        |u| {
            let dn = ctx.sncndn(u.into()).2.re;
            dn / (dn + kp)
        },
        0.0,
        t,
        16,
        4,
    );
    k * k / kp * frac - t * ctx.k_minus_e() / (kp * ctx.big_k())
}

/// Mass squared of a vertex with half-angles `angles`.
pub fn mass2(ctx: &EllipticContext, angles: &[f64]) -> f64 {
    angles.iter().map(|&t| edge_mass(ctx, t)).sum()
}

/// Diagonal coefficient `Σ A(θ)`.
pub fn diagonal(ctx: &EllipticContext, angles: &[f64]) -> f64 {
    angles.iter().map(|&t| a_term(ctx, t)).sum()
}

/// Laplacian data of a periodic graph for one modulus.
#[derive(Debug, Clone)]
pub struct Massive<'g> {
    pub graph: &'g PeriodicGraph,
    pub ctx: EllipticContext,
    /// `ρ` per fundamental-domain edge.
    pub rho: Vec<f64>,
    pub mass2: Vec<f64>,
    pub diag: Vec<f64>,
}

impl<'g> Massive<'g> {
    pub fn new(graph: &'g PeriodicGraph, ctx: EllipticContext) -> Self {
        let rho = graph.edges().iter().map(|e| conductance(&ctx, e.theta_bar)).collect();
        let angles: Vec<Vec<f64>> =
            (0..graph.num_vertices()).map(|i| graph.incident(i).iter().map(|e| e.theta_bar).collect()).collect();
        let mass2: Vec<f64> = angles.iter().map(|a| self::mass2(&ctx, a)).collect();
        let diag = angles.iter().zip(&mass2).map(|(a, m)| m + a.iter().map(|&t| conductance(&ctx, t)).sum::<f64>()).collect();
        Massive { graph, ctx, rho, mass2, diag }
    }

    /// `(Δf)(x)` on the infinite graph.
    pub fn apply<F: Fn(VertexRef) -> C64>(&self, f: F, x: VertexRef) -> C64 {
        let mut acc = f(x) * self.diag[x.idx];
        for (y, e) in self.graph.neighbors(x) {
            acc -= f(y) * conductance(&self.ctx, e.theta_bar);
        }
        acc
    }

    /// Fourier matrix `Δ(z, w)`: `(Δ(z,w))_{x,y} = Σ Δ(x, y+(m,n)) z^{-m} w^{-n}`,
    /// so that quasi-periodic `f(x+(m,n)) = z^{-m} w^{-n} f(x)` satisfy
    /// `Δf = Δ(z,w) f` on the fundamental domain.
    pub fn fourier(&self, z: C64, w: C64) -> DMatrix<C64> {
        let n = self.graph.num_vertices();
        let mut m = DMatrix::from_fn(n, n, |i, j| if i == j { C64::new(self.diag[i], 0.0) } else { C64::new(0.0, 0.0) });
        for (e, &r) in self.graph.edges().iter().zip(&self.rho) {
            let phase = z.powi(-e.shift[0] as i32) * w.powi(-e.shift[1] as i32);
            m[(e.tail, e.head)] -= phase * r;
            m[(e.head, e.tail)] -= phase.inv() * r;
        }
        m
    }
}

/// Sparse symmetric operator on a finite graph.
#[derive(Debug, Clone)]
pub struct SparseLaplacian {
    pub diag: Vec<f64>,
    /// Off-diagonal entries per row: `(column, -ρ)`.
    pub rows: Vec<Vec<(usize, f64)>>,
    /// Weight of each vertex's edge to the root: `d(x) - Σ_inner ρ`.
    pub root_weight: Vec<f64>,
}

impl SparseLaplacian {
    pub fn new(ctx: &EllipticContext, g: &FiniteGraph) -> Self {
        // few distinct angles: evaluate each once
        let mut cache: HashMap<u64, (f64, f64)> = HashMap::new();
        let mut weights = |tb: f64| {
            *cache.entry(tb.to_bits()).or_insert_with(|| (conductance(ctx, tb), edge_mass(ctx, tb)))
        };
        let mut rows = vec![Vec::new(); g.len()];
        let mut inner = vec![0.0; g.len()];
        // killed outer edges: ρ + mass share, both towards the root
        let mut root_weight: Vec<f64> = g
            .outer
            .iter()
            .map(|o| o.iter().map(|&tb| { let (r, m) = weights(tb); r + m }).sum())
            .collect();
        for e in &g.edges {
            let (r, m) = weights(e.theta_bar);
            rows[e.a].push((e.b, -r));
            rows[e.b].push((e.a, -r));
            inner[e.a] += r;
            inner[e.b] += r;
            root_weight[e.a] += m;
            root_weight[e.b] += m;
        }
        let diag = root_weight.iter().zip(&inner).map(|(w, s)| w + s).collect();
        SparseLaplacian { diag, rows, root_weight }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }
    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.diag[i] * x[i] + self.rows[i].iter().map(|&(j, v)| v * x[j]).sum::<f64>();
        }
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.diag.clone()));
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[(i, j)] += v;
            }
        }
        m
    }

    /// Preconditioned conjugate gradients for `Δ x = b`. Returns the solution
    /// and the final relative residual.
    pub fn solve_cg(&self, b: &[f64], rtol: f64, max_iter: usize) -> (Vec<f64>, f64) {
        let n = self.len();
        let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let mut x = vec![0.0; n];
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&self.diag).map(|(a, d)| a / d).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; n];
        let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let mut res = 1.0;
        for _ in 0..max_iter {
            self.matvec(&p, &mut ap);
            let alpha = rz / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            res = r.iter().map(|v| v * v).sum::<f64>().sqrt() / bnorm;
            if res < rtol {
                break;
            }
            for i in 0..n {
                z[i] = r[i] / self.diag[i];
            }
            let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        (x, res)
    }
}
