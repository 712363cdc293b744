//! The massive Green function, four ways: the local contour integral, its
//! residue form, a killed-boundary solve on a finite patch, and the Fourier
//! double integral over the unit torus.

use crate::asymptotics::saddle_point;
use crate::elliptic::EllipticContext;
use crate::expfun::{ExpError, ExpPath};
use crate::isograph::{PeriodicGraph, VertexRef};
use crate::laplacian::{elliptic_angle, Massive, SparseLaplacian};
use crate::par::{self, Exec};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GreenError {
    #[error(transparent)]
    Path(#[from] ExpError),
    #[error("{method} did not converge: last change {delta:e} at size {size}")]
    NotConverged { method: Method, size: usize, delta: f64 },
    #[error("Δ(z,w) is singular at z = {z}, w = {w}")]
    Singular { z: C64, w: C64 },
    #[error("residue form needs simple poles (every step count 1)")]
    MultiplePole,
    #[error("unknown method '{0}'")]
    UnknownMethod(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    LocalContour,
    LocalResidue,
    TruncatedSolve,
    Fourier,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::LocalContour => "local-contour",
            Method::LocalResidue => "local-residue",
            Method::TruncatedSolve => "truncated-solve",
            Method::Fourier => "fourier",
        })
    }
}

impl FromStr for Method {
    type Err = GreenError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "local" | "local-contour" => Method::LocalContour,
            "residue" | "local-residue" => Method::LocalResidue,
            "truncated" | "truncated-solve" => Method::TruncatedSolve,
            "fourier" => Method::Fourier,
            _ => return Err(GreenError::UnknownMethod(s.into())),
        })
    }
}

/// A Green-function value with its convergence diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GreenValue {
    pub value: f64,
    #[serde(skip)]
    pub method: Method,
    /// Imaginary part discarded by the method (zero for real methods).
    pub imag: f64,
    /// Quadrature nodes, patch radius or grid side, depending on the method.
    pub size: usize,
    /// Last successive change, an error estimate.
    pub delta: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ContourOptions {
    pub start_nodes: usize,
    pub max_nodes: usize,
    pub rtol: f64,
}

impl Default for ContourOptions {
    fn default() -> Self {
        ContourOptions { start_nodes: 64, max_nodes: 8192, rtol: 1e-10 }
    }
}

/// `k'K'/π`, the value on the diagonal.
pub fn diagonal_value(ctx: &EllipticContext) -> f64 {
    ctx.kp() * ctx.big_kp() / PI
}

/// Abscissa of the vertical contour: the saddle of χ, which lies in the
/// sector of step angles and therefore in the pole-free band.
pub fn contour_abscissa(ctx: &EllipticContext, path: &ExpPath) -> Result<f64, ExpError> {
    if path.is_empty() {
        return Ok(2.0 * ctx.big_k());
    }
    match saddle_point(ctx, path) {
        Ok(s) => Ok(s.u0),
        Err(_) => Ok(path.midpoint(ctx)?.0),
    }
}

/// `(k'/4iπ) ∮ e(u) du` on `φ + [0, 4iK']` by the trapezoid rule,
/// doubling the nodes until successive values agree.
pub fn green_local_path(ctx: &EllipticContext, path: &ExpPath, opts: ContourOptions) -> Result<GreenValue, GreenError> {
    let phi = contour_abscissa(ctx, path)?;
    let period = 4.0 * ctx.big_kp();
    let at = |t: f64| path.eval(ctx, C64::new(phi, t));
    let pref = diagonal_value(ctx);
    let mut n = opts.start_nodes.max(2);
    let mut sum: C64 = (0..n).map(|j| at(period * j as f64 / n as f64)).sum();
    let mut scale = 0.0f64;
    let mut prev = pref * sum / n as f64;
    loop {
        // odd nodes of the doubled grid
        let odd: Vec<C64> = (0..n).map(|j| at(period * (2 * j + 1) as f64 / (2 * n) as f64)).collect();
        scale = odd.iter().fold(scale, |m, v| m.max(v.norm()));
        sum += odd.iter().sum::<C64>();
        n *= 2;
        let cur = pref * sum / n as f64;
        let delta = (cur - prev).norm();
        if delta <= opts.rtol * cur.norm() + 1e-15 * pref * scale {
            return Ok(GreenValue { value: cur.re, method: Method::LocalContour, imag: cur.im, size: n, delta });
        }
        if n >= opts.max_nodes {
            return Err(GreenError::NotConverged { method: Method::LocalContour, size: n, delta });
        }
        prev = cur;
    }
}

pub fn green_local(g: &PeriodicGraph, ctx: &EllipticContext, x: VertexRef, y: VertexRef) -> Result<GreenValue, GreenError> {
    green_local_path(ctx, &ExpPath::between(g, ctx, x, y), ContourOptions::default())
}

/// Contour values for many pairs.
pub fn green_local_batch(
    exec: Exec,
    g: &PeriodicGraph,
    ctx: &EllipticContext,
    pairs: &[(VertexRef, VertexRef)],
) -> Vec<Result<GreenValue, GreenError>> {
    par::map(exec, pairs, |&(x, y)| green_local(g, ctx, x, y))
}

/// Residue form `(k'/2) Σ res(H·e)`, with `H`'s branch fixed by the window
/// `(φ, φ + 4K)` to the right of the contour. Simple poles only.
pub fn green_residue_path(ctx: &EllipticContext, path: &ExpPath) -> Result<f64, GreenError> {
    if path.counts.iter().any(|&c| c != 1) {
        return Err(GreenError::MultiplePole);
    }
    let phi = contour_abscissa(ctx, path)?;
    let (kk, kp) = (ctx.big_k(), ctx.kp());
    let into_window = |p: f64| phi + (p - phi).rem_euclid(4.0 * kk);
    let s = kp.sqrt();
    let mut acc = C64::new(0.0, 0.0);
    for (j, &aj) in path.alphas.iter().enumerate() {
        let pole = aj + 2.0 * kk;
        // res of sc((u-α)/2) at α+2K is -2/k'
        let mut res = I * s * (-2.0 / kp);
        for (l, &al) in path.alphas.iter().enumerate() {
            if l != j {
                res *= I * s * ctx.sc((0.5 * (pole - al)).into());
            }
        }
        acc += res * ctx.h_fn(into_window(pole).into());
    }
    // H has residue 2K'/π at 2iK' + 4KZ, where every factor of e is 4K-periodic
    acc += path.eval_top(ctx) * (2.0 * ctx.big_kp() / PI);
    Ok(0.5 * kp * acc.re)
}

/// The three closed forms for adjacent vertices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborForms {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl NeighborForms {
    pub fn spread(&self) -> f64 {
        (self.a - self.b).abs().max((self.a - self.c).abs()).max((self.b - self.c).abs())
    }
}

/// `G(x,y)` for an edge `x → y = x + e^{iᾱ} + e^{iβ̄}` with half-angle
/// `θ̄ = (β̄ - ᾱ)/2`, from the residue theorem in three variants.
pub fn green_neighbor(ctx: &EllipticContext, alpha_bar: f64, theta_bar: f64) -> NeighborForms {
    let (kk, kp, kkp) = (ctx.big_k(), ctx.kp(), ctx.big_kp());
    let alpha = elliptic_angle(ctx, alpha_bar);
    let theta = elliptic_angle(ctx, theta_bar);
    let beta = alpha + 2.0 * theta;
    let h = |u: f64| ctx.h_fn(u.into()).re;
    let sc = ctx.sc(theta.into()).re;
    let dn = |u: f64| ctx.sncndn(u.into()).2.re;
    // e_(x,y)(2iK') = k' / (dn(α/2) dn(β/2))
    let e_xy = kp / (dn(0.5 * alpha) * dn(0.5 * beta));
    let a = (h(alpha + 2.0 * kk) - h(beta + 2.0 * kk)) / sc + kp * kkp / PI * e_xy;
    let b = (h(alpha) - h(beta)) / sc + kkp / PI * dn(0.5 * alpha) * dn(0.5 * beta);
    let c = -h(2.0 * theta) / sc + kkp / PI * dn(theta);
    NeighborForms { a, b, c }
}

/// `θ̄ / (π tan θ̄)`, the massless limit of `G(x,x) - G(x,y)` for neighbors.
pub fn massless_neighbor_difference(theta_bar: f64) -> f64 {
    theta_bar / (PI * theta_bar.tan())
}

#[derive(Debug, Clone, Copy)]
pub struct TruncationOptions {
    pub start_radius: usize,
    pub step: usize,
    pub max_radius: usize,
    pub tol: f64,
}

impl Default for TruncationOptions {
    fn default() -> Self {
        TruncationOptions { start_radius: 8, step: 8, max_radius: 400, tol: 1e-11 }
    }
}

/// `G(·, y)` on a finite graph with killed boundary, solved by CG.
pub fn solve_column(lap: &SparseLaplacian, y: usize) -> Vec<f64> {
    let mut b = vec![0.0; lap.len()];
    b[y] = 1.0;
    lap.solve_cg(&b, 1e-14, 20 * lap.len() + 100).0
}

/// `G(x,y)` from killed-boundary solves on growing balls around `{x,y}`.
/// Killed values increase monotonically with the patch; successive
/// differences shrink geometrically, and the remaining tail is estimated
/// from their ratio.
pub fn green_truncated(
    g: &PeriodicGraph,
    ctx: &EllipticContext,
    x: VertexRef,
    y: VertexRef,
    opts: TruncationOptions,
) -> Result<GreenValue, GreenError> {
    let mut r = opts.start_radius;
    let mut hist: Vec<f64> = Vec::new();
    loop {
        let verts = g.ball(&[x, y], r);
        let fg = g.induced(&verts);
        let lap = SparseLaplacian::new(ctx, &fg);
        let find = |v: VertexRef| verts.iter().position(|&w| w == v).expect("center in ball");
        let col = solve_column(&lap, find(y));
        let val = col[find(x)];
        hist.push(val);
        if hist.len() >= 3 {
            let n = hist.len();
            let (d1, d0) = (hist[n - 1] - hist[n - 2], hist[n - 2] - hist[n - 3]);
            let q = if d0.abs() > 0.0 { (d1 / d0).abs().min(0.99) } else { 0.0 };
            let tail = d1.abs() * q / (1.0 - q);
            if d1.abs() + tail < opts.tol {
                return Ok(GreenValue { value: val + d1.signum() * tail, method: Method::TruncatedSolve, imag: 0.0, size: r, delta: d1.abs() + tail });
            }
            if r + opts.step > opts.max_radius {
                return Err(GreenError::NotConverged { method: Method::TruncatedSolve, size: r, delta: d1.abs() });
            }
        }
        r += opts.step;
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FourierOptions {
    pub start_grid: usize,
    pub max_grid: usize,
    pub tol: f64,
}

impl Default for FourierOptions {
    fn default() -> Self {
        FourierOptions { start_grid: 16, max_grid: 1024, tol: 1e-11 }
    }
}

/// `G(x + (m,n), y)` for `x, y` in the fundamental domain, as the torus mean
/// of `z^{-m} w^{-n} (Δ(z,w)^{-1})_{x,y}`. Grids double and reuse the
/// previous nodes.
pub fn green_fourier(
    exec: Exec,
    g: &PeriodicGraph,
    ctx: &EllipticContext,
    x: usize,
    y: usize,
    shift: [i64; 2],
    opts: FourierOptions,
) -> Result<GreenValue, GreenError> {
    let m = Massive::new(g, ctx.clone());
    let at = |i: usize, j: usize, n: usize| -> Result<C64, GreenError> {
        let z = C64::from_polar(1.0, 2.0 * PI * i as f64 / n as f64);
        let w = C64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
        let lu = m.fourier(z, w).lu();
        let mut e = nalgebra::DVector::from_element(g.num_vertices(), C64::new(0.0, 0.0));
        e[y] = C64::new(1.0, 0.0);
        let col = lu.solve(&e).ok_or(GreenError::Singular { z, w })?;
        Ok(col[x] * z.powi(-shift[0] as i32) * w.powi(-shift[1] as i32))
    };
    let sum_rows = |n: usize, keep: &(dyn Fn(usize, usize) -> bool + Sync)| -> Result<C64, GreenError> {
        let rows = par::map_range(exec, n, |i| -> Result<C64, GreenError> {
            let mut s = C64::new(0.0, 0.0);
            for j in 0..n {
                if keep(i, j) {
                    s += at(i, j, n)?;
                }
            }
            Ok(s)
        });
        rows.into_iter().sum()
    };
    let mut n = opts.start_grid;
    let mut sum = sum_rows(n, &|_, _| true)?;
    let mut prev = sum / (n * n) as f64;
    loop {
        n *= 2;
        sum += sum_rows(n, &|i, j| i % 2 == 1 || j % 2 == 1)?;
        let cur = sum / (n * n) as f64;
        let delta = (cur - prev).norm();
        if delta < opts.tol {
            return Ok(GreenValue { value: cur.re, method: Method::Fourier, imag: cur.im, size: n, delta });
        }
        if n * 2 > opts.max_grid {
            return Err(GreenError::NotConverged { method: Method::Fourier, size: n, delta });
        }
        prev = cur;
    }
}

/// Dispatch on the method for a pair on a periodic graph.
pub fn green(
    method: Method,
    g: &PeriodicGraph,
    ctx: &EllipticContext,
    x: VertexRef,
    y: VertexRef,
) -> Result<GreenValue, GreenError> {
    match method {
        Method::LocalContour => green_local(g, ctx, x, y),
        Method::LocalResidue => {
            let value = green_residue_path(ctx, &ExpPath::between(g, ctx, x, y))?;
            Ok(GreenValue { value, method, imag: 0.0, size: 0, delta: 0.0 })
        }
        Method::TruncatedSolve => green_truncated(g, ctx, x, y, TruncationOptions::default()),
        Method::Fourier => {
            let shift = [x.cell[0] - y.cell[0], x.cell[1] - y.cell[1]];
            green_fourier(Exec::default(), g, ctx, x.idx, y.idx, shift, FourierOptions::default())
        }
    }
}
