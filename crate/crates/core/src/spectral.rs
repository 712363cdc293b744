//! Spectral curve `{P(z,w) = 0}` of a periodic graph: characteristic
//! polynomial, Newton polygon, the parametrisation by the torus, its amoeba
//! and the adjugate of `Δ(z,w)` along the curve.

use crate::elliptic::EllipticContext;
use crate::isograph::PeriodicGraph;
use crate::laplacian::Massive;
use crate::par::{self, Exec};
use crate::quad::gauss_composite;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("coefficient extraction aliased: |c| = {0:e} outside the expected support")]
    Aliased(f64),
    #[error("track homologies do not close into a centred polygon")]
    OpenPolygon,
}

/// Laurent polynomial `Σ c[i][j] z^i w^j`, `|i| ≤ zdeg`, `|j| ≤ wdeg`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CharPoly {
    pub zdeg: i64,
    pub wdeg: i64,
    /// Row-major over `i = -zdeg..=zdeg`, then `j = -wdeg..=wdeg`.
    pub coeffs: Vec<f64>,
}

impl CharPoly {
    fn width(&self) -> usize {
        (2 * self.wdeg + 1) as usize
    }

    pub fn coeff(&self, i: i64, j: i64) -> f64 {
        if i.abs() > self.zdeg || j.abs() > self.wdeg {
            return 0.0;
        }
        self.coeffs[(i + self.zdeg) as usize * self.width() + (j + self.wdeg) as usize]
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, i64, f64)> + '_ {
        let (zd, wd) = (self.zdeg, self.wdeg);
        (-zd..=zd).flat_map(move |i| (-wd..=wd).map(move |j| (i, j, self.coeff(i, j)))).filter(|t| t.2 != 0.0)
    }

    pub fn eval(&self, z: C64, w: C64) -> C64 {
        self.terms().map(|(i, j, c)| z.powi(i as i32) * w.powi(j as i32) * c).sum()
    }

    /// `∂P/∂w`.
    pub fn eval_dw(&self, z: C64, w: C64) -> C64 {
        self.terms().map(|(i, j, c)| z.powi(i as i32) * w.powi(j as i32 - 1) * (c * j as f64)).sum()
    }

    /// `Σ |c|`, the scale for relative residuals.
    pub fn norm1(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    pub fn support(&self) -> Vec<[i64; 2]> {
        self.terms().map(|(i, j, _)| [i, j]).collect()
    }

    /// `max |c[i][j] - c[-i][-j]|`.
    pub fn reciprocity_residual(&self) -> f64 {
        self.terms().map(|(i, j, c)| (c - self.coeff(-i, -j)).abs()).fold(0.0, f64::max)
    }

    /// Polynomial in `w` (ascending powers from `w^{-wdeg}`) at fixed `z`.
    fn w_coeffs(&self, z: C64) -> Vec<C64> {
        (-self.wdeg..=self.wdeg)
            .map(|j| (-self.zdeg..=self.zdeg).map(|i| z.powi(i as i32) * self.coeff(i, j)).sum())
            .collect()
    }

    /// All `w` with `P(z, w) = 0`, from the companion matrix.
    pub fn w_roots(&self, z: C64) -> Vec<C64> {
        let mut a = self.w_coeffs(z);
        let scale = a.iter().map(|c| c.norm()).fold(0.0, f64::max);
        while a.last().is_some_and(|c| c.norm() < 1e-14 * scale) {
            a.pop();
        }
        let lead = match a.last() {
            Some(&l) => l,
            None => return Vec::new(),
        };
        let n = a.len() - 1;
        if n == 0 {
            return Vec::new();
        }
        let comp = DMatrix::from_fn(n, n, |r, c| {
            if c == n - 1 {
                -a[r] / lead
            } else if r == c + 1 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        comp.schur().eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default()
    }
}

fn dft_phase(k: usize, n: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)
}

/// Coefficients of `det Δ(z,w)` by an inverse DFT over roots of unity,
/// on a grid one larger than the degree bound in each direction.
pub fn char_poly(exec: Exec, m: &Massive) -> Result<CharPoly, SpectralError> {
    let zb: i64 = m.graph.edges().iter().map(|e| e.shift[0].abs()).sum();
    let wb: i64 = m.graph.edges().iter().map(|e| e.shift[1].abs()).sum();
    let (nz, nw) = ((2 * zb + 2) as usize, (2 * wb + 2) as usize);
    let vals: Vec<C64> = par::map_range(exec, nz * nw, |idx| {
        let (a, b) = (idx / nw, idx % nw);
        m.fourier(dft_phase(a, nz), dft_phase(b, nw)).determinant()
    });
    let mut raw = vec![0.0; ((2 * zb + 1) * (2 * wb + 1)) as usize];
    let mut max = 0.0f64;
    let mut alias = 0.0f64;
    let coef = |i: i64, j: i64| -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for a in 0..nz {
            for b in 0..nw {
                let ph = dft_phase((-(i * a as i64)).rem_euclid(nz as i64) as usize, nz)
                    * dft_phase((-(j * b as i64)).rem_euclid(nw as i64) as usize, nw);
                s += vals[a * nw + b] * ph;
            }
        }
        s / (nz * nw) as f64
    };
    for i in -zb..=zb {
        for j in -wb..=wb {
            let c = coef(i, j).re;
            max = max.max(c.abs());
            raw[((i + zb) * (2 * wb + 1) + j + wb) as usize] = c;
        }
    }
    // the extra row/column of the grid must be empty
    for j in -wb..=wb + 1 {
        alias = alias.max(coef(zb + 1, j).norm());
    }
    for i in -zb..=zb + 1 {
        alias = alias.max(coef(i, wb + 1).norm());
    }
    if alias > 1e-9 * max {
        return Err(SpectralError::Aliased(alias));
    }
    for c in raw.iter_mut() {
        if c.abs() < 1e-10 * max {
            *c = 0.0;
        }
    }
    let full = CharPoly { zdeg: zb, wdeg: wb, coeffs: raw };
    // trim to the tight rectangle
    let zdeg = full.terms().map(|t| t.0.abs()).max().unwrap_or(0);
    let wdeg = full.terms().map(|t| t.1.abs()).max().unwrap_or(0);
    let coeffs = (-zdeg..=zdeg).flat_map(|i| (-wdeg..=wdeg).map(move |j| (i, j))).map(|(i, j)| full.coeff(i, j)).collect();
    Ok(CharPoly { zdeg, wdeg, coeffs })
}

/// Convex hull (counter-clockwise, no collinear vertices, starting at the
/// lowest-then-leftmost point).
pub fn convex_hull(points: &[[i64; 2]]) -> Vec<[i64; 2]> {
    let mut p: Vec<[i64; 2]> = points.to_vec();
    p.sort_by_key(|q| (q[1], q[0]));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let cross = |o: [i64; 2], a: [i64; 2], b: [i64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull: Vec<[i64; 2]> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[i64; 2]>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    hull
}

/// The centrally symmetric polygon whose edges are `±(h_T, v_T)` in angular
/// order, centred at the origin.
pub fn newton_polygon_from_tracks(g: &PeriodicGraph) -> Result<Vec<[i64; 2]>, SpectralError> {
    let mut edges: Vec<[i64; 2]> = g.tracks().iter().flat_map(|t| [[t.h, t.v], [-t.h, -t.v]]).collect();
    edges.sort_by(|a, b| (a[1] as f64).atan2(a[0] as f64).total_cmp(&(b[1] as f64).atan2(b[0] as f64)));
    let mut verts = vec![[0i64, 0]];
    for e in &edges {
        let l = verts[verts.len() - 1];
        verts.push([l[0] + e[0], l[1] + e[1]]);
    }
    if verts.pop() != Some([0, 0]) {
        return Err(SpectralError::OpenPolygon);
    }
    let n = verts.len() as i64;
    let s = verts.iter().fold([0i64, 0], |a, v| [a[0] + v[0], a[1] + v[1]]);
    let hull = convex_hull(&verts);
    // centre: vertices of a centrally symmetric polygon average to its centre
    let hs = hull.iter().fold([0i64, 0], |a, v| [a[0] + v[0], a[1] + v[1]]);
    let hn = hull.len() as i64;
    if hs[0] % hn != 0 || hs[1] % hn != 0 || s[0] * hn != hs[0] * n || s[1] * hn != hs[1] * n {
        return Err(SpectralError::OpenPolygon);
    }
    let c = [hs[0] / hn, hs[1] / hn];
    Ok(convex_hull(&hull.iter().map(|v| [v[0] - c[0], v[1] - c[1]]).collect::<Vec<_>>()))
}

/// Twice-signed area of an integer polygon.
pub fn lattice_area2(poly: &[[i64; 2]]) -> i64 {
    let n = poly.len();
    (0..n).map(|i| poly[i][0] * poly[(i + 1) % n][1] - poly[(i + 1) % n][0] * poly[i][1]).sum()
}

/// Parametrisation `u ↦ (z(u), w(u))` of the spectral curve.
#[derive(Debug, Clone)]
pub struct Curve {
    pub ctx: EllipticContext,
    /// `(α_T, exponent of z, exponent of w)` per track.
    pub factors: Vec<(f64, i32, i32)>,
}

impl Curve {
    pub fn new(g: &PeriodicGraph, ctx: &EllipticContext) -> Self {
        let scale = 2.0 * ctx.big_k() / PI;
        let factors = g.tracks().iter().map(|t| (t.alpha_bar * scale, -t.v as i32, t.h as i32)).collect();
        Curve { ctx: ctx.clone(), factors }
    }

    fn factor(&self, alpha: f64, u: C64) -> C64 {
        I * self.ctx.kp().sqrt() * self.ctx.sc(0.5 * (u - alpha))
    }

    pub fn zw(&self, u: C64) -> (C64, C64) {
        self.factors.iter().fold((C64::new(1.0, 0.0), C64::new(1.0, 0.0)), |(z, w), &(a, ez, ew)| {
            let f = self.factor(a, u);
            (z * f.powi(ez), w * f.powi(ew))
        })
    }

    /// `(z'/z, w'/w)` using `(log sc)'(v) = dn/(sn cn)`.
    pub fn log_derivs(&self, u: C64) -> (C64, C64) {
        self.factors.iter().fold((C64::new(0.0, 0.0), C64::new(0.0, 0.0)), |(dz, dw), &(a, ez, ew)| {
            let (s, c, d) = self.ctx.sncndn(0.5 * (u - a));
            let l = 0.5 * d / (s * c);
            (dz + l * ez as f64, dw + l * ew as f64)
        })
    }

    /// `Log(z, w)` on the hole boundary `u + 2iK'`, `u` real; there each
    /// factor is `-√k' nd((u-α)/2)`.
    pub fn hole_point(&self, u: f64) -> [f64; 2] {
        self.factors.iter().fold([0.0, 0.0], |acc, &(a, ez, ew)| {
            let l = (self.ctx.kp().sqrt() / self.ctx.sncndn((0.5 * (u - a)).into()).2.re).ln();
            [acc[0] + ez as f64 * l, acc[1] + ew as f64 * l]
        })
    }

    /// `d/du` of [`Curve::hole_point`].
    pub fn hole_tangent(&self, u: f64) -> [f64; 2] {
        let k2 = self.ctx.k() * self.ctx.k();
        self.factors.iter().fold([0.0, 0.0], |acc, &(a, ez, ew)| {
            let (s, c, d) = self.ctx.sncndn((0.5 * (u - a)).into());
            let l = 0.5 * k2 * (s * c / d).re;
            [acc[0] + ez as f64 * l, acc[1] + ew as f64 * l]
        })
    }

    /// `Log(z, w)` at a real `u` (outer boundary); infinite at track angles.
    pub fn outer_point(&self, u: f64) -> [f64; 2] {
        let (z, w) = self.zw(u.into());
        [z.norm().ln(), w.norm().ln()]
    }
}

pub fn curve_param(g: &PeriodicGraph, ctx: &EllipticContext, u: C64) -> (C64, C64) {
    Curve::new(g, ctx).zw(u)
}

/// Shoelace area of a closed polyline (absolute value).
pub fn polygon_area(pts: &[[f64; 2]]) -> f64 {
    let n = pts.len();
    0.5 * (0..n).map(|i| pts[i][0] * pts[(i + 1) % n][1] - pts[(i + 1) % n][0] * pts[i][1]).sum::<f64>().abs()
}

/// Winding number of a closed polyline around `p`.
pub fn winding_number(pts: &[[f64; 2]], p: [f64; 2]) -> i32 {
    let n = pts.len();
    let total: f64 = (0..n)
        .map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            let (a0, a1, b0, b1) = (a[0] - p[0], a[1] - p[1], b[0] - p[0], b[1] - p[1]);
            (a0 * b1 - a1 * b0).atan2(a0 * b0 + a1 * b1)
        })
        .sum();
    (total / (2.0 * PI)).round() as i32
}

pub fn hole_boundary(curve: &Curve, n: usize) -> Vec<[f64; 2]> {
    let p = 4.0 * curve.ctx.big_k();
    (0..n).map(|i| curve.hole_point(p * i as f64 / n as f64)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct HoleArea {
    /// Shoelace area of the sampled boundary.
    pub shoelace: f64,
    /// `½∮ (X dY - Y dX)` by Gauss–Legendre with the analytic tangent.
    pub quadrature: f64,
}

pub fn hole_area(g: &PeriodicGraph, ctx: &EllipticContext) -> HoleArea {
    let curve = Curve::new(g, ctx);
    let shoelace = polygon_area(&hole_boundary(&curve, 16384));
    let quadrature = 0.5
        * gauss_composite(
            |u| {
                let (p, t) = (curve.hole_point(u), curve.hole_tangent(u));
                p[0] * t[1] - p[1] * t[0]
            },
            0.0,
            4.0 * ctx.big_k(),
            20,
            64,
        )
        .abs();
    HoleArea { shoelace, quadrature }
}

/// Support function `min_{s ∈ hole} ⟨dir, s⟩`, sampled and then refined by
/// golden-section search.
pub fn hole_support_min(curve: &Curve, dir: [f64; 2]) -> f64 {
    let p = 4.0 * curve.ctx.big_k();
    let n = 4096;
    let f = |u: f64| {
        let s = curve.hole_point(u);
        dir[0] * s[0] + dir[1] * s[1]
    };
    let best = (0..n).min_by(|&a, &b| f(p * a as f64 / n as f64).total_cmp(&f(p * b as f64 / n as f64))).unwrap();
    let (mut a, mut b) = (p * (best as f64 - 1.0) / n as f64, p * (best as f64 + 1.0) / n as f64);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    while b - a > 1e-12 {
        let (c, d) = (b - r * (b - a), a + r * (b - a));
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    f(0.5 * (a + b))
}

/// Tentacle of the outer boundary near a zero or pole of one track factor.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Tentacle {
    pub u: f64,
    /// Unit direction of the sampled secant.
    pub direction: [f64; 2],
    /// Unit direction expected from the track homology.
    pub expected: [f64; 2],
    /// `|sin|` of the angle between the two.
    pub error: f64,
}

/// Secant of `Log` between `|u - α| = 0.01K` and `10⁻⁴K`, at both ends
/// `α_T` and `α_T + 2K` of every track.
pub fn tentacles(curve: &Curve) -> Vec<Tentacle> {
    let kk = curve.ctx.big_k();
    let mut out = Vec::new();
    for &(a, ez, ew) in &curve.factors {
        for (end, sign) in [(a, -1.0), (a + 2.0 * kk, 1.0)] {
            let (p1, p2) = (curve.outer_point(end + 0.01 * kk), curve.outer_point(end + 1e-4 * kk));
            let d = [p2[0] - p1[0], p2[1] - p1[1]];
            let dn = d[0].hypot(d[1]);
            let e = [sign * ez as f64, sign * ew as f64];
            let en = e[0].hypot(e[1]);
            let (d, e) = ([d[0] / dn, d[1] / dn], [e[0] / en, e[1] / en]);
            let error = (d[0] * e[1] - d[1] * e[0]).abs().max(if d[0] * e[0] + d[1] * e[1] < 0.0 { 1.0 } else { 0.0 });
            out.push(Tentacle { u: end.rem_euclid(4.0 * kk), direction: d, expected: e, error });
        }
    }
    out.sort_by(|a, b| a.u.total_cmp(&b.u));
    out
}

/// Tentacle directions turn counter-clockwise as `u` increases, once around.
pub fn tentacles_ccw(t: &[Tentacle]) -> bool {
    let ang: Vec<f64> = t.iter().map(|x| x.direction[1].atan2(x.direction[0])).collect();
    let n = ang.len();
    let turns: Vec<f64> = (0..n).map(|i| (ang[(i + 1) % n] - ang[i]).rem_euclid(2.0 * PI)).collect();
    turns.iter().all(|&d| d > 0.0 && d < PI) && ((turns.iter().sum::<f64>() - 2.0 * PI).abs() < 1e-6)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct AmoebaSample {
    pub scatter: Vec<[f64; 2]>,
    pub outer: Vec<[f64; 2]>,
    pub hole: Vec<[f64; 2]>,
    pub hole_area: f64,
}

/// `Log` images of an `m × m` grid on the torus plus the two real ovals.
pub fn amoeba_sample(exec: Exec, g: &PeriodicGraph, ctx: &EllipticContext, m: usize) -> AmoebaSample {
    let curve = Curve::new(g, ctx);
    let (p, pi) = (4.0 * ctx.big_k(), 4.0 * ctx.big_kp());
    let scatter: Vec<[f64; 2]> = par::map_range(exec, m * m, |idx| {
        let u = C64::new(p * ((idx / m) as f64 + 0.5) / m as f64, pi * ((idx % m) as f64 + 0.5) / m as f64);
        let (z, w) = curve.zw(u);
        [z.norm().ln(), w.norm().ln()]
    })
    .into_iter()
    .filter(|q| q[0].is_finite() && q[1].is_finite())
    .collect();
    let n = 4 * m.max(64);
    let outer = (0..n)
        .map(|i| curve.outer_point(p * (i as f64 + 0.5) / n as f64))
        .filter(|q| q[0].is_finite() && q[1].is_finite())
        .collect();
    let hole = hole_boundary(&curve, n);
    let hole_area = polygon_area(&hole);
    AmoebaSample { scatter, outer, hole, hole_area }
}

/// Total amoeba area by slices: at each `X = log|z|` the slice is the union
/// over `w`-root branches (sorted by modulus) of their `log|w|` ranges as
/// `arg z` turns once.
pub fn amoeba_area(exec: Exec, cp: &CharPoly, xmax: f64, nx: usize, ntheta: usize) -> f64 {
    let h = 2.0 * xmax / nx as f64;
    let slices = par::map_range(exec, nx + 1, |ix| {
        let x = -xmax + h * ix as f64;
        let mut ranges: Vec<(f64, f64)> = Vec::new();
        for it in 0..ntheta {
            let z = C64::from_polar(x.exp(), 2.0 * PI * it as f64 / ntheta as f64);
            let mut ys: Vec<f64> = cp.w_roots(z).iter().map(|w| w.norm().ln()).filter(|y| y.is_finite()).collect();
            ys.sort_by(f64::total_cmp);
            if ranges.is_empty() {
                ranges = ys.iter().map(|&y| (y, y)).collect();
            } else if ys.len() == ranges.len() {
                for (r, y) in ranges.iter_mut().zip(ys) {
                    *r = (r.0.min(y), r.1.max(y));
                }
            }
        }
        ranges.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (mut len, mut cur): (f64, Option<(f64, f64)>) = (0.0, None);
        for r in ranges {
            cur = match cur {
                Some(c) if r.0 <= c.1 => Some((c.0, c.1.max(r.1))),
                Some(c) => {
                    len += c.1 - c.0;
                    Some(r)
                }
                None => Some(r),
            };
        }
        len + cur.map_or(0.0, |c| c.1 - c.0)
    });
    let n = slices.len();
    h * (slices.iter().sum::<f64>() - 0.5 * (slices[0] + slices[n - 1]))
}

/// Adjugate of a small complex matrix by cofactors.
pub fn adjugate(m: &DMatrix<C64>) -> DMatrix<C64> {
    let n = m.nrows();
    if n == 1 {
        return DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    }
    DMatrix::from_fn(n, n, |i, j| {
        let minor = m.clone().remove_row(j).remove_column(i);
        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        minor.determinant() * sign
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdjugateDiag {
    /// `Q_{x,x}(z(u), w(u))` per vertex of the fundamental domain.
    pub diag: Vec<C64>,
    pub spread: f64,
    /// Two smallest singular values of `Δ(z(u), w(u))`, ascending.
    pub smallest: [f64; 2],
}

pub fn adjugate_diag(m: &Massive, curve: &Curve, u: C64) -> AdjugateDiag {
    let (z, w) = curve.zw(u);
    let d = m.fourier(z, w);
    let q = adjugate(&d);
    let diag: Vec<C64> = (0..d.nrows()).map(|i| q[(i, i)]).collect();
    let spread = diag.iter().map(|v| (v - diag[0]).norm()).fold(0.0, f64::max);
    let mut sv: Vec<f64> = d.singular_values().iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    let smallest = [sv[0], sv.get(1).copied().unwrap_or(f64::INFINITY)];
    AdjugateDiag { diag, spread, smallest }
}

/// `g(u) · (z'/z) / (w ∂P/∂w)` with `g = Q_{x,x}`: constant along the curve.
pub fn holomorphic_form_ratio(m: &Massive, cp: &CharPoly, curve: &Curve, u: C64) -> C64 {
    let (z, w) = curve.zw(u);
    let g = adjugate(&m.fourier(z, w))[(0, 0)];
    g * curve.log_derivs(u).0 / (w * cp.eval_dw(z, w))
}
