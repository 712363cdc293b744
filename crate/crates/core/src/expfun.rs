//! The discrete massive exponential `e_{(x,y)}(u)`: a product of
//! `i√k' sc((u-α)/2)` over the steps of a diamond path from `x` to `y`,
//! and the rate function χ obtained on the line `Im u = 2K'`.

use crate::elliptic::EllipticContext;
use crate::isograph::{PeriodicGraph, Step, VertexRef};
use crate::laplacian::Massive;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExpError {
    #[error("u = {u} is within {dist:e} of the pole at {pole}")]
    NearPole { u: C64, pole: C64, dist: f64 },
    #[error("u = {0} lies outside the strip |Im u| < 2K'")]
    OutsideStrip(C64),
    #[error("step angles do not fit in a half-plane")]
    NoSector,
}

/// Step data of a minimal path in elliptic units.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpPath {
    /// Distinct step angles in `[0, 4K)`.
    pub alphas: Vec<f64>,
    pub counts: Vec<u32>,
}

impl ExpPath {
    pub fn from_steps(ctx: &EllipticContext, steps: &[Step]) -> Self {
        let scale = 2.0 * ctx.big_k() / PI;
        ExpPath {
            alphas: steps.iter().map(|s| s.alpha_bar * scale).collect(),
            counts: steps.iter().map(|s| s.count).collect(),
        }
    }

    pub fn between(g: &PeriodicGraph, ctx: &EllipticContext, x: VertexRef, y: VertexRef) -> Self {
        Self::from_steps(ctx, &g.path_steps(x, y))
    }

    /// `|x - y|`, the number of diamond steps.
    pub fn len(&self) -> u32 {
        self.counts.iter().sum()
    }
    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Smallest arc of the circle `R/4KZ` containing every angle, as
    /// `(start, width)`; `None` when the path is empty.
    pub fn sector(&self, ctx: &EllipticContext) -> Option<(f64, f64)> {
        let period = 4.0 * ctx.big_k();
        let mut a: Vec<f64> = self.alphas.iter().map(|x| x.rem_euclid(period)).collect();
        if a.is_empty() {
            return None;
        }
        a.sort_by(f64::total_cmp);
        let n = a.len();
        // the sector starts right after the widest gap
        let (mut best, mut start) = (period - (a[n - 1] - a[0]), a[0]);
        for i in 1..n {
            let gap = a[i] - a[i - 1];
            if gap > best {
                best = gap;
                start = a[i];
            }
        }
        Some((start, period - best))
    }

    /// Sector midpoint and the margin `ε` with width `= 2K - 2ε`.
    pub fn midpoint(&self, ctx: &EllipticContext) -> Result<(f64, f64), ExpError> {
        let (start, width) = self.sector(ctx).ok_or(ExpError::NoSector)?;
        let eps = ctx.big_k() - 0.5 * width;
        if eps <= 0.0 {
            return Err(ExpError::NoSector);
        }
        Ok((start + 0.5 * width, eps))
    }

    /// `e(u)` as a direct product. Panics never; returns non-finite at poles.
    pub fn eval(&self, ctx: &EllipticContext, u: C64) -> C64 {
        let s = ctx.kp().sqrt();
        self.alphas.iter().zip(&self.counts).fold(C64::new(1.0, 0.0), |acc, (&a, &n)| {
            acc * (I * s * ctx.sc(0.5 * (u - a))).powu(n)
        })
    }

    /// `log e(u)`, accumulated factor by factor (branch: sum of principal logs).
    pub fn log_eval(&self, ctx: &EllipticContext, u: C64) -> C64 {
        let s = ctx.kp().sqrt();
        self.alphas.iter().zip(&self.counts).map(|(&a, &n)| (I * s * ctx.sc(0.5 * (u - a))).ln() * n as f64).sum()
    }

    /// `e(2iK')`, where each factor reduces to `-√k' nd(α/2)`.
    pub fn eval_top(&self, ctx: &EllipticContext) -> f64 {
        let s = ctx.kp().sqrt();
        self.alphas.iter().zip(&self.counts).map(|(&a, &n)| (-s / ctx.sncndn((0.5 * a).into()).2.re).powi(n as i32)).product()
    }

    /// Checked evaluation: refuses points within `tol` of a pole.
    pub fn eval_checked(&self, ctx: &EllipticContext, u: C64, tol: f64) -> Result<C64, ExpError> {
        let (p4, p4i) = (4.0 * ctx.big_k(), 4.0 * ctx.big_kp());
        for &a in &self.alphas {
            let d = u - (a + 2.0 * ctx.big_k());
            let w = C64::new(d.re - p4 * (d.re / p4).round(), d.im - p4i * (d.im / p4i).round());
            if w.norm() < tol {
                return Err(ExpError::NearPole { u, pole: u - w, dist: w.norm() });
            }
        }
        Ok(self.eval(ctx, u))
    }

    /// `χ(u) = Σ n_j log(√k' nd((u-α_j)/2))` with `n_j = N_j / |x-y|`.
    pub fn chi(&self, ctx: &EllipticContext, u: C64) -> Result<C64, ExpError> {
        if u.im.abs() >= 2.0 * ctx.big_kp() {
            return Err(ExpError::OutsideStrip(u));
        }
        let len = self.len() as f64;
        let s = ctx.kp().sqrt();
        Ok(self
            .alphas
            .iter()
            .zip(&self.counts)
            .map(|(&a, &n)| (s / ctx.sncndn(0.5 * (u - a)).2).ln() * (n as f64 / len))
            .sum())
    }

    /// `χ'(u)` and `χ''(u)` on the real line, from
    /// `d/dv log nd(v) = k² sn cn / dn`.
    pub fn chi_derivs(&self, ctx: &EllipticContext, u: f64) -> (f64, f64) {
        let len = self.len() as f64;
        let k2 = ctx.k() * ctx.k();
        let (mut d1, mut d2) = (0.0, 0.0);
        for (&a, &n) in self.alphas.iter().zip(&self.counts) {
            let (s, c, d) = ctx.sncndn((0.5 * (u - a)).into());
            let (s, c, d) = (s.re, c.re, d.re);
            let w = n as f64 / len;
            d1 += w * 0.5 * k2 * s * c / d;
            // (sn cn / dn)' = (cn² dn² - sn² dn² + k² sn² cn²) / dn²
            d2 += w * 0.25 * k2 * (c * c * d * d - s * s * d * d + k2 * s * s * c * c) / (d * d);
        }
        (d1, d2)
    }
}

/// `e_{(x,y)}(u)` on a periodic graph.
pub fn mass_exp(g: &PeriodicGraph, ctx: &EllipticContext, x: VertexRef, y: VertexRef, u: C64) -> C64 {
    ExpPath::between(g, ctx, x, y).eval(ctx, u)
}

/// `(Δ e_{(·,y)}(u))(x)` relative to the size of the terms involved.
pub fn harmonic_residual(m: &Massive, x: VertexRef, y: VertexRef, u: C64) -> f64 {
    let f = |v: VertexRef| mass_exp(m.graph, &m.ctx, v, y, u);
    let scale = f(x).norm() * m.diag[x.idx] + m.graph.neighbors(x).map(|(v, _)| f(v).norm()).sum::<f64>();
    m.apply(f, x).norm() / scale.max(1e-300)
}

/// Residual of the three-leg identity
/// `A(θ) - sc(θ) e_{(y,x)}(u) = A(u_{α+2K}) - A(u_{β+2K})` for the edge
/// `x → y = x + e^{iα} + e^{iβ}` (elliptic angles, `β = α + 2θ`).
pub fn three_leg_residual(ctx: &EllipticContext, alpha: f64, beta: f64, u: C64) -> f64 {
    let theta = 0.5 * (beta - alpha);
    let s = ctx.kp().sqrt();
    let e_xy = (I * s * ctx.sc(0.5 * (u - alpha))) * (I * s * ctx.sc(0.5 * (u - beta)));
    let lhs = ctx.a_fn(theta.into()) - ctx.sc(theta.into()) / e_xy;
    let kk = ctx.big_k();
    let rhs = ctx.a_fn(0.5 * (u - alpha - 2.0 * kk)) - ctx.a_fn(0.5 * (u - beta - 2.0 * kk));
    (lhs - rhs).norm() / (1.0 + lhs.norm())
}
