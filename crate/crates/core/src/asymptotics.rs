//! Saddle-point data of the rate function χ and the large-distance
//! asymptotics of the Green function.

use crate::elliptic::EllipticContext;
use crate::expfun::{ExpError, ExpPath};
use crate::isograph::{PeriodicGraph, VertexRef};
use crate::spectral::{hole_support_min, Curve};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AsymptoticError {
    #[error("x = y: there is no direction")]
    ZeroDistance,
    #[error(transparent)]
    Path(#[from] ExpError),
    #[error("χ' does not change sign on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },
    #[error("χ''(u₀) = {0:e} is too small for the Gaussian prefactor")]
    Flat(f64),
}

/// Saddle of χ on the real sector of a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleData {
    pub u0: f64,
    pub chi: f64,
    pub chi1: f64,
    pub chi2: f64,
    /// Sector midpoint and half-gap ε (width `2K - 2ε`).
    pub midpoint: f64,
    pub eps: f64,
}

impl SaddleData {
    /// `log(√k' nd(ε/2))`, the a priori bound on χ over the sector.
    pub fn rate_bound(&self, ctx: &EllipticContext) -> f64 {
        (ctx.kp().sqrt() / ctx.sncndn((0.5 * self.eps).into()).2.re).ln()
    }
}

/// Unique zero of χ' on the sector `[α_min, α_max]`: bisection to 1e-6,
/// then Newton with the analytic χ''.
pub fn saddle_point(ctx: &EllipticContext, path: &ExpPath) -> Result<SaddleData, AsymptoticError> {
    if path.is_empty() {
        return Err(AsymptoticError::ZeroDistance);
    }
    let (midpoint, eps) = path.midpoint(ctx)?;
    let half = ctx.big_k() - eps;
    let d1 = |u: f64| path.chi_derivs(ctx, u).0;
    let (mut lo, mut hi) = (midpoint - half, midpoint + half);
    if half < 1e-12 {
        // one direction only: χ' is odd about it
        return finish(ctx, path, midpoint, midpoint, eps);
    }
    let (flo, fhi) = (d1(lo), d1(hi));
    if flo > 1e-14 || fhi < -1e-14 {
        return Err(AsymptoticError::Bracket { lo, hi });
    }
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if d1(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut u = 0.5 * (lo + hi);
    for _ in 0..20 {
        let (g1, g2) = path.chi_derivs(ctx, u);
        let step = g1 / g2;
        u -= step;
        if step.abs() < 1e-15 * (1.0 + u.abs()) {
            break;
        }
    }
    finish(ctx, path, u, midpoint, eps)
}

fn finish(ctx: &EllipticContext, path: &ExpPath, u0: f64, midpoint: f64, eps: f64) -> Result<SaddleData, AsymptoticError> {
    let chi = path.chi(ctx, u0.into())?.re;
    let (chi1, chi2) = path.chi_derivs(ctx, u0);
    Ok(SaddleData { u0, chi, chi1, chi2, midpoint, eps })
}

/// `k' e^{Lχ(u₀)} / (2√(2πLχ''(u₀)))` with `L = |x-y|`.
pub fn green_asymptotic(ctx: &EllipticContext, path: &ExpPath) -> Result<f64, AsymptoticError> {
    let s = saddle_point(ctx, path)?;
    if s.chi2 < 1e-8 {
        return Err(AsymptoticError::Flat(s.chi2));
    }
    let len = path.len() as f64;
    Ok(ctx.kp() * (len * s.chi).exp() / (2.0 * (2.0 * PI * len * s.chi2).sqrt()))
}

/// Decay rate per diamond step of `G(x + t(a,b), x)` read off the amoeba
/// hole: `min_{s ∈ hole} -⟨(a,b), s⟩ / |(a,b)|`, with `|·|` the diamond
/// distance of the translation.
pub fn rate_from_amoeba(g: &PeriodicGraph, ctx: &EllipticContext, dir: [i64; 2]) -> Result<f64, AsymptoticError> {
    let o = VertexRef::new(0, 0, 0);
    let len = g.distance(o, o.translate(dir[0], dir[1]));
    if len == 0 {
        return Err(AsymptoticError::ZeroDistance);
    }
    let curve = Curve::new(g, ctx);
    Ok(hole_support_min(&curve, [-dir[0] as f64, -dir[1] as f64]) / len as f64)
}

/// Number of sign changes of χ' on a dense grid of the sector.
pub fn saddle_count(ctx: &EllipticContext, path: &ExpPath, samples: usize) -> Result<usize, AsymptoticError> {
    let (mid, eps) = path.midpoint(ctx)?;
    let half = ctx.big_k() - eps;
    let vals: Vec<f64> =
        (0..=samples).map(|i| path.chi_derivs(ctx, mid - half + 2.0 * half * i as f64 / samples as f64).0).collect();
    Ok(vals.windows(2).filter(|w| (w[0] < 0.0) != (w[1] < 0.0)).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2_path(k: f64, a: i64, b: i64) -> (EllipticContext, ExpPath) {
        let g = PeriodicGraph::preset("square").unwrap();
        let ctx = EllipticContext::new(k).unwrap();
        let p = ExpPath::between(&g, &ctx, VertexRef::new(0, 0, 0), VertexRef::new(0, a, b));
        (ctx, p)
    }

    #[test]
    fn single_direction_saddle_is_that_direction() {
        let (ctx, p) = z2_path(0.5, 3, 3);
        assert_eq!(p.alphas.len(), 1);
        let s = saddle_point(&ctx, &p).unwrap();
        assert!((s.u0 - p.alphas[0]).abs() < 1e-14);
        assert!(s.chi < 0.0 && s.chi2 > 0.0);
    }

    #[test]
    fn saddle_matches_grid_argmin() {
        let (ctx, p) = z2_path(0.5, 3, 1);
        let s = saddle_point(&ctx, &p).unwrap();
        assert!(s.chi1.abs() < 1e-11);
        assert!(s.chi <= s.rate_bound(&ctx) + 1e-14);
        let (mid, eps) = (s.midpoint, s.eps);
        let half = ctx.big_k() - eps;
        let n = 10_000;
        let h = 2.0 * half / n as f64;
        let argmin = (0..=n)
            .map(|i| mid - half + h * i as f64)
            .min_by(|a, b| p.chi(&ctx, (*a).into()).unwrap().re.total_cmp(&p.chi(&ctx, (*b).into()).unwrap().re))
            .unwrap();
        assert!((argmin - s.u0).abs() <= h);
        assert_eq!(saddle_count(&ctx, &p, 4000).unwrap(), 1);
    }

    #[test]
    fn rate_vanishes_as_mass_goes_away() {
        let rates: Vec<f64> = [0.3, 0.1, 0.03].iter().map(|&k| {
            let (ctx, p) = z2_path(k, 2, 1);
            saddle_point(&ctx, &p).unwrap().chi
        }).collect();
        assert!(rates.iter().all(|&r| r < 0.0));
        assert!(rates[0] < rates[1] && rates[1] < rates[2]);
        assert!(rates[2] > -1e-3);
    }

    #[test]
    fn amoeba_rate_matches_saddle_rate() {
        for p in ["square", "paper-fig4"] {
            let g = PeriodicGraph::preset(p).unwrap();
            for k in [0.3, 0.5, 0.8] {
                let ctx = EllipticContext::new(k).unwrap();
                for dir in [[1, 0], [0, 1], [2, 1], [-1, 3]] {
                    let o = VertexRef::new(0, 0, 0);
                    let path = ExpPath::between(&g, &ctx, o, o.translate(dir[0], dir[1]));
                    let s = saddle_point(&ctx, &path).unwrap();
                    let r = rate_from_amoeba(&g, &ctx, dir).unwrap();
                    let back = rate_from_amoeba(&g, &ctx, [-dir[0], -dir[1]]).unwrap();
                    assert!((r - s.chi).abs() < 1e-9, "{p} {k} {dir:?}: {r} vs {}", s.chi);
                    assert!((r - back).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn zero_distance_is_rejected() {
        let (ctx, p) = z2_path(0.5, 0, 0);
        assert_eq!(saddle_point(&ctx, &p).unwrap_err(), AsymptoticError::ZeroDistance);
    }
}
