//! Jacobi elliptic functions of complex argument, the Jacobi epsilon
//! function, and the two derived primitives `A` and `H` that carry the whole
//! massive-Laplacian machinery.
//!
//! Real arguments go through the descending Landen (AGM) scheme after
//! reduction to `[0, K/2]`; complex arguments are assembled from the real
//! values for the modulus and its complement with the addition theorems.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EllipticError {
    #[error("elliptic modulus k = {0} must lie in the open interval (0, 1)")]
    Modulus(f64),
    #[error("argument {0} is not finite or exceeds the supported range")]
    Argument(C64),
    #[error("evaluation hit a pole at u = {0}")]
    Pole(C64),
    #[error("unknown Jacobi function code `{0}`")]
    Code(String),
}

/// Real-argument evaluator for one modulus.
#[derive(Debug, Clone)]
struct RealJacobi {
    k: f64,
    kp: f64,
    big_k: f64,
    big_e: f64,
    /// `K - E`, kept separately since it is `O(k²)`.
    k_minus_e: f64,
}

impl RealJacobi {
    fn new(k: f64, kp: f64) -> Self {
        let (mut a, mut b, mut c) = (1.0f64, kp, k);
        let mut pow = 0.5;
        let mut defect = pow * c * c;
        for _ in 0..64 {
            if c <= 1e-17 * a {
                break;
            }
            let an = 0.5 * (a + b);
            let bn = (a * b).sqrt();
            c = c * c / (4.0 * an);
            a = an;
            b = bn;
            pow *= 2.0;
            defect += pow * c * c;
        }
        let big_k = PI / (2.0 * a);
        RealJacobi { k, kp, big_k, big_e: big_k * (1.0 - defect), k_minus_e: big_k * defect }
    }

    /// sn, cn, dn and the Jacobi zeta function for `0 <= u <= K/2`.
    fn core(&self, u: f64) -> (f64, f64, f64, f64) {
        let mut a = [0.0f64; 40];
        let mut c = [0.0f64; 40];
        a[0] = 1.0;
        c[0] = self.k;
        let mut b = self.kp;
        let mut n = 0;
        while n + 1 < a.len() && c[n] > 1e-17 * a[n] {
            let an = 0.5 * (a[n] + b);
            b = (a[n] * b).sqrt();
            c[n + 1] = c[n] * c[n] / (4.0 * an);
            a[n + 1] = an;
            n += 1;
        }
        if n == 0 {
            return (u.sin(), u.cos(), 1.0, 0.0);
        }
        let mut phi = (1u64 << n) as f64 * a[n] * u;
        let mut zeta = 0.0;
        let mut phi1 = phi;
        for m in (1..=n).rev() {
            zeta += c[m] * phi.sin();
            phi1 = phi;
            phi = 0.5 * (phi + (c[m] / a[m] * phi.sin()).asin());
        }
        let (sn, cn) = phi.sin_cos();
        (sn, cn, cn / (phi1 - phi).cos(), zeta)
    }

    /// Splits `x` as `2K n + r` with `|r| <= K`.
    fn reduce(&self, x: f64) -> (f64, f64) {
        let n = (x / (2.0 * self.big_k)).round();
        (n, x - 2.0 * self.big_k * n)
    }

    fn sncndn(&self, x: f64) -> (f64, f64, f64) {
        let (n, r) = self.reduce(x);
        let a = r.abs();
        let (sn, cn, dn) = if a <= 0.5 * self.big_k {
            let (s, c, d, _) = self.core(a);
            (s, c, d)
        } else {
            // Shift by a quarter period so cn keeps full relative accuracy.
            let (s, c, d, _) = self.core(self.big_k - a);
            (c / d, self.kp * s / d, self.kp / d)
        };
        let sn = sn.copysign(r);
        if n.rem_euclid(2.0) == 1.0 {
            (-sn, -cn, dn)
        } else {
            (sn, cn, dn)
        }
    }

    /// Jacobi epsilon function `∫_0^x dn^2` for real `x`.
    fn epsilon(&self, x: f64) -> f64 {
        let (n, r) = self.reduce(x);
        let a = r.abs();
        let ratio = self.big_e / self.big_k;
        let e = if a <= 0.5 * self.big_k {
            self.core(a).3 + ratio * a
        } else {
            let b = self.big_k - a;
            let (s, c, d, z) = self.core(b);
            self.big_e - (z + ratio * b) + self.k * self.k * s * c / d
        };
        2.0 * self.big_e * n + e.copysign(r)
    }
}

/// Complete elliptic data for a modulus `k ∈ (0,1)` together with the
/// evaluators for `k` and for the complementary modulus `k'`.
#[derive(Debug, Clone)]
pub struct EllipticContext {
    fwd: RealJacobi,
    cmp: RealJacobi,
}

impl EllipticContext {
    pub fn new(k: f64) -> Result<Self, EllipticError> {
        if !(k > 0.0 && k < 1.0) {
            return Err(EllipticError::Modulus(k));
        }
        let kp = ((1.0 - k) * (1.0 + k)).sqrt();
        Ok(EllipticContext { fwd: RealJacobi::new(k, kp), cmp: RealJacobi::new(kp, k) })
    }

    /// Context for the complementary modulus `k'` (roles of `K`, `K'` swap).
    pub fn complementary(&self) -> Self {
        EllipticContext { fwd: self.cmp.clone(), cmp: self.fwd.clone() }
    }

    pub fn k(&self) -> f64 {
        self.fwd.k
    }
    pub fn kp(&self) -> f64 {
        self.fwd.kp
    }
    /// `K(k)`.
    pub fn big_k(&self) -> f64 {
        self.fwd.big_k
    }
    /// `K'(k) = K(k')`.
    pub fn big_kp(&self) -> f64 {
        self.cmp.big_k
    }
    pub fn big_e(&self) -> f64 {
        self.fwd.big_e
    }
    pub fn big_ep(&self) -> f64 {
        self.cmp.big_e
    }
    /// `K - E` without cancellation.
    pub fn k_minus_e(&self) -> f64 {
        self.fwd.k_minus_e
    }
    /// Nome `q = exp(-π K'/K)`.
    pub fn nome(&self) -> f64 {
        (-PI * self.big_kp() / self.big_k()).exp()
    }

    /// `(sn, cn, dn)(u)`; non-finite at poles.
    pub fn sncndn(&self, u: C64) -> (C64, C64, C64) {
        let (s, c, d) = self.fwd.sncndn(u.re);
        if u.im == 0.0 {
            return (s.into(), c.into(), d.into());
        }
        let (s1, c1, d1) = self.cmp.sncndn(u.im);
        let k2 = self.fwd.k * self.fwd.k;
        let den = c1 * c1 + k2 * s * s * s1 * s1;
        (
            C64::new(s * d1, c * d * s1 * c1) / den,
            C64::new(c * c1, -s * d * s1 * d1) / den,
            C64::new(d * c1 * d1, -k2 * s * c * s1) / den,
        )
    }

    /// `sc(u)`; near the line `Im u = K'` (mod 2K'), where sn and cn blow up
    /// together, uses `sc(w ± iK') = ±i nd(w)`.
    pub fn sc(&self, u: C64) -> C64 {
        let kp2 = 2.0 * self.big_kp();
        let m = (u.im / kp2).round();
        let w = C64::new(u.re, u.im - m * kp2);
        // anti-periodic under 2iK'
        let sign = if (m as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let half = 0.5 * self.big_kp();
        let v = if w.im > half {
            C64::new(0.0, 1.0) / self.sncndn(w - C64::new(0.0, self.big_kp())).2
        } else if w.im < -half {
            C64::new(0.0, -1.0) / self.sncndn(w + C64::new(0.0, self.big_kp())).2
        } else {
            let (s, c, _) = self.sncndn(w);
            s / c
        };
        v * sign
    }

    /// Any of the twelve Jacobi functions, with range and pole checks.
    pub fn jacobi(&self, code: Pq, u: C64) -> Result<C64, EllipticError> {
        self.check(u)?;
        let (s, c, d) = self.sncndn(u);
        let pick = |ch: u8| match ch {
            b's' => s,
            b'c' => c,
            b'd' => d,
            _ => C64::new(1.0, 0.0),
        };
        let v = pick(code.0[0]) / pick(code.0[1]);
        if v.is_finite() && v.norm() < 1e150 {
            Ok(v)
        } else {
            Err(EllipticError::Pole(u))
        }
    }

    fn check(&self, u: C64) -> Result<(), EllipticError> {
        if !u.is_finite() || u.re.abs() > 1e6 * self.big_k() || u.im.abs() > 1e6 * self.big_kp() {
            Err(EllipticError::Argument(u))
        } else {
            Ok(())
        }
    }

    /// Jacobi epsilon `E(u|k) = ∫_0^u dn^2`, meromorphic with simple poles
    /// at the poles of `dn`.
    pub fn epsilon(&self, u: C64) -> C64 {
        let (kk, kkp) = (self.big_k(), self.big_kp());
        let (e, ep) = (self.big_e(), self.big_ep());
        let nr = (u.re / (2.0 * kk)).round();
        let ni = (u.im / (2.0 * kkp)).round();
        let v = u - C64::new(2.0 * kk * nr, 2.0 * kkp * ni);
        let shift = C64::new(2.0 * e * nr, 2.0 * (kkp - ep) * ni);
        if v.im.abs() <= 0.5 * kkp {
            return shift + self.epsilon_near_real(v);
        }
        // E(w ± iK') = E(w) + cn(w) ds(w) ± i(K' - E')
        let sgn = v.im.signum();
        let w = v - I * (sgn * kkp);
        let (s, c, d) = self.sncndn(w);
        shift + self.epsilon_near_real(w) + c * d / s + I * (sgn * (kkp - ep))
    }

    fn epsilon_near_real(&self, u: C64) -> C64 {
        let ex = self.fwd.epsilon(u.re);
        if u.im == 0.0 {
            return ex.into();
        }
        let y = u.im;
        let (s1, c1, d1) = self.cmp.sncndn(y);
        // E(iy|k) = i [ y + dn(y|k') sc(y|k') - E(y|k') ],  sn(iy|k) = i sc(y|k')
        let eiy = I * (y + d1 * s1 / c1 - self.cmp.epsilon(y));
        let (sx, _, _) = self.fwd.sncndn(u.re);
        let sn_u = self.sncndn(u).0;
        let k2 = self.k() * self.k();
        ex + eiy - k2 * sx * (I * (s1 / c1)) * sn_u
    }

    /// `A(u|k) = -(i/k') E(iu|k') + (E-K)/(k'K) u`; odd, `2K`-periodic,
    /// with derivative `dc^2/k' - (K-E)/(k'K)`.
    pub fn a_fn(&self, u: C64) -> C64 {
        let comp = self.complementary();
        let (kk, e, kp) = (self.big_k(), self.big_e(), self.kp());
        -I / kp * comp.epsilon(I * u) + (e - kk) / (kp * kk) * u
    }

    /// `H(u) = (K'/π) [E(u/2|k) + (E'-K')/K' · u/2]`.
    ///
    /// Real on the real line, `H(u+4K) = H(u)+1`, `H(u+4iK') = H(u)`, simple
    /// pole at `2iK'` with residue `2K'/π`.
    pub fn h_fn(&self, u: C64) -> C64 {
        let kkp = self.big_kp();
        (self.epsilon(0.5 * u) + (self.big_ep() - kkp) / kkp * 0.5 * u) * (kkp / PI)
    }

    /// Derivative `H'(u) = (K'/2π) [dn^2(u/2) + (E'-K')/K']`.
    pub fn h_prime(&self, u: C64) -> C64 {
        let kkp = self.big_kp();
        let d = self.sncndn(0.5 * u).2;
        (d * d + (self.big_ep() - kkp) / kkp) * (kkp / (2.0 * PI))
    }

    /// Nome-series form of `H` on the real line, indexed by the angle
    /// `θ̄ = π u / (4K)`.
    pub fn h_series(&self, theta_bar: f64) -> f64 {
        let q = self.nome();
        let mut sum = 0.0;
        let mut qs = 1.0;
        for s in 1..400 {
            qs *= q;
            let term = qs / (1.0 - qs * qs) * (2.0 * s as f64 * theta_bar).sin();
            sum += term;
            if qs < 1e-18 {
                break;
            }
        }
        theta_bar / PI + 2.0 * self.big_kp() / self.big_k() * sum
    }
}

/// Two-letter Jacobi function code such as `sn`, `cd`, `ns`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pq([u8; 2]);

impl FromStr for Pq {
    type Err = EllipticError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let b = s.as_bytes();
        let ok = |c: u8| matches!(c, b's' | b'c' | b'd' | b'n');
        if b.len() == 2 && ok(b[0]) && ok(b[1]) && b[0] != b[1] {
            Ok(Pq([b[0], b[1]]))
        } else {
            Err(EllipticError::Code(s.to_string()))
        }
    }
}

impl fmt::Display for Pq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.0[0] as char, self.0[1] as char)
    }
}

/// One step of ascending Landen: `ℓ = (1-k')/(1+k')`, `μ = (1-ℓ)/(1+ℓ)`.
#[derive(Debug, Clone, Copy)]
pub struct Landen {
    pub ell: f64,
    pub mu: f64,
}

pub fn landen_ascent(k: f64) -> Result<Landen, EllipticError> {
    if !(k > 0.0 && k < 1.0) {
        return Err(EllipticError::Modulus(k));
    }
    let kp = ((1.0 - k) * (1.0 + k)).sqrt();
    let ell = k * k / ((1.0 + kp) * (1.0 + kp));
    Ok(Landen { ell, mu: (1.0 - ell) / (1.0 + ell) })
}

/// Named residuals of the standard identity battery at `(u, v)`.
///
/// Each entry is a relative residual; callers pick points away from poles.
pub fn identity_residuals(ctx: &EllipticContext, u: C64, v: C64) -> Vec<(&'static str, f64)> {
    let (k, kp) = (ctx.k(), ctx.kp());
    let (kk, kkp) = (ctx.big_k(), ctx.big_kp());
    let k2 = k * k;
    let rel = |a: C64, b: C64| (a - b).norm() / (1.0 + a.norm().max(b.norm()));
    let (s, c, d) = ctx.sncndn(u);
    let (sv, cv, dv) = ctx.sncndn(v);
    let one = C64::new(1.0, 0.0);
    let sc = |w: C64| ctx.sc(w);
    let comp = ctx.complementary();
    let (s_iu, _, _) = ctx.sncndn(I * u);
    let (sc1, cc1, _) = comp.sncndn(u);
    let legendre = ctx.big_e() * kkp + ctx.big_ep() * kk - kk * kkp;
    let (suv, _, _) = ctx.sncndn(u + v);
    let addition = (s * cv * dv + sv * c * d) / (one - k2 * s * s * sv * sv);
    let eps_add = ctx.epsilon(u) + ctx.epsilon(v) - k2 * s * sv * suv;
    let a_shift = ctx.a_fn(v) - ctx.a_fn(u) - kp * sc(u) * sc(v) * sc(v - u);
    let a_refl = -ctx.a_fn(u) + (one / s) * (d / c) / kp;
    vec![
        ("sn^2+cn^2=1", rel(s * s + c * c, one)),
        ("dn^2+k^2sn^2=1", rel(d * d + k2 * s * s, one)),
        ("dn^2-k^2cn^2=k'^2", rel(d * d - k2 * c * c, (kp * kp).into())),
        ("sn(u+2K)=-sn(u)", rel(ctx.sncndn(u + 2.0 * kk).0, -s)),
        ("sn(u+2iK')=sn(u)", rel(ctx.sncndn(u + I * (2.0 * kkp)).0, s)),
        ("sc(u+iK')=i/dn(u)", rel(sc(u + I * kkp), I / d)),
        ("sc(u-K)=-1/(k'sc u)", rel(sc(u - kk), -one / (kp * sc(u)))),
        ("dn(u+K)=k'/dn(u)", rel(ctx.sncndn(u + kk).2, kp / d)),
        ("sn(u-iK')=1/(k sn u)", rel(ctx.sncndn(u - I * kkp).0, one / (k * s))),
        ("sn(iu|k)=i sc(u|k')", rel(s_iu, I * sc1 / cc1)),
        ("legendre", (legendre - PI / 2.0).abs()),
        ("sn addition", rel(suv, addition)),
        ("epsilon addition", rel(ctx.epsilon(u + v), eps_add)),
        ("A difference", rel(ctx.a_fn(v - u), a_shift)),
        ("A reflection", rel(ctx.a_fn(kk - u), a_refl)),
        ("H(u+4K)=H(u)+1", rel(ctx.h_fn(u + 4.0 * kk), ctx.h_fn(u) + 1.0)),
        ("H(u+4iK')=H(u)", rel(ctx.h_fn(u + I * (4.0 * kkp)), ctx.h_fn(u))),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gauss_composite;

    fn ctx(k: f64) -> EllipticContext {
        EllipticContext::new(k).unwrap()
    }

    // ∫_0^{π/2} dφ / sqrt(1 - k^2 sin^2 φ) by brute quadrature.
    fn k_oracle(k: f64) -> f64 {
        gauss_composite(|p| 1.0 / (1.0 - k * k * p.sin().powi(2)).sqrt(), 0.0, PI / 2.0, 20, 40)
    }
    fn e_oracle(k: f64) -> f64 {
        gauss_composite(|p| (1.0 - k * k * p.sin().powi(2)).sqrt(), 0.0, PI / 2.0, 20, 40)
    }

    #[test]
    fn complete_integrals_match_quadrature() {
        for &k in &[1e-4, 0.2, 0.5, 0.8, 0.99] {
            let c = ctx(k);
            assert!((c.big_k() - k_oracle(k)).abs() < 1e-13, "K at {k}");
            assert!((c.big_e() - e_oracle(k)).abs() < 1e-13, "E at {k}");
            if k >= 0.2 {
                assert!((c.big_kp() - k_oracle(c.kp())).abs() < 1e-11, "K' at {k}");
            } else {
                // K' ≈ L + k²/4 (L - 1), L = ln(4/k)
                let l = (4.0 / k).ln();
                assert!((c.big_kp() - (l + k * k / 4.0 * (l - 1.0))).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn frozen_complete_values() {
        // K(1/√2) = Γ(1/4)^2 / (4 sqrt(π)); lemniscatic case has K = K'.
        let c = ctx(std::f64::consts::FRAC_1_SQRT_2);
        let g14 = 3.625_609_908_221_908_4;
        assert!((c.big_k() - g14 * g14 / (4.0 * PI.sqrt())).abs() < 1e-14);
        assert!((c.big_k() - c.big_kp()).abs() < 1e-14);
        assert!((c.nome() - (-PI).exp()).abs() < 1e-15);
    }

    #[test]
    fn sn_inverts_incomplete_integral() {
        // u = F(φ) ⇒ sn(u) = sin φ, with F by quadrature.
        for &k in &[0.3, 0.9] {
            let c = ctx(k);
            for &phi in &[0.1, 0.7, 1.3, 1.55] {
                let u = gauss_composite(|t| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt(), 0.0, phi, 20, 10);
                let (s, cn, d) = c.sncndn(u.into());
                assert!((s.re - phi.sin()).abs() < 1e-14);
                assert!((cn.re - phi.cos()).abs() < 1e-14);
                assert!((d.re - (1.0 - k * k * phi.sin().powi(2)).sqrt()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn epsilon_matches_path_integral_of_dn_squared() {
        let c = ctx(0.6);
        for &u in &[C64::new(0.7, 0.3), C64::new(-1.9, 1.4), C64::new(2.5, -1.7), C64::new(0.3, 2.2)] {
            // straight segment 0 → u, parameter t ∈ [0,1]
            let re = gauss_composite(|t| (c.sncndn(u * t).2.powu(2) * u).re, 0.0, 1.0, 20, 60);
            let im = gauss_composite(|t| (c.sncndn(u * t).2.powu(2) * u).im, 0.0, 1.0, 20, 60);
            let e = c.epsilon(u);
            assert!((e - C64::new(re, im)).norm() < 1e-11, "{u}: {e} vs {re}+{im}i");
        }
    }

    #[test]
    fn epsilon_quasi_periods() {
        let c = ctx(0.45);
        let u = C64::new(0.37, 0.21);
        let e2k = c.epsilon(u + 2.0 * c.big_k()) - c.epsilon(u);
        assert!((e2k - 2.0 * c.big_e()).norm() < 1e-13);
        let e2ik = c.epsilon(u + I * 2.0 * c.big_kp()) - c.epsilon(u);
        assert!((e2ik - I * 2.0 * (c.big_kp() - c.big_ep())).norm() < 1e-12);
    }

    #[test]
    fn a_derivative_and_symmetry() {
        let c = ctx(0.7);
        let kp = c.kp();
        let slope = (c.big_k() - c.big_e()) / (kp * c.big_k());
        for &u in &[C64::new(0.4, 0.1), C64::new(-0.9, 0.5)] {
            let h = 1e-4;
            let num = (c.a_fn(u + h) - c.a_fn(u - h)) / (2.0 * h);
            let (_, cn, dn) = c.sncndn(u);
            let exact = (dn / cn).powu(2) / kp - slope;
            assert!((num - exact).norm() < 1e-7);
            assert!((c.a_fn(-u) + c.a_fn(u)).norm() < 1e-13);
            assert!((c.a_fn(u + 2.0 * c.big_k()) - c.a_fn(u)).norm() < 1e-12);
            let jump = c.a_fn(u + I * 2.0 * c.big_kp()) - c.a_fn(u);
            assert!((jump - I * PI / (kp * c.big_k())).norm() < 1e-11);
        }
    }

    #[test]
    fn h_closed_form_vs_series() {
        for &k in &[0.1, 0.5, 0.9] {
            let c = ctx(k);
            for i in 0..13 {
                let tb = -1.0 + 0.37 * i as f64;
                let u = 4.0 * c.big_k() * tb / PI;
                let h = c.h_fn(u.into());
                assert!(h.im.abs() < 1e-15);
                assert!((h.re - c.h_series(tb)).abs() < 1e-12, "k={k} θ̄={tb}");
            }
        }
    }

    #[test]
    fn h_limits_and_residue() {
        let c = ctx(1e-6);
        for &u in &[0.3, 1.1, 2.9] {
            assert!((c.h_fn(u.into()).re - u / (2.0 * PI)).abs() < 1e-9);
        }
        let c = ctx(0.5);
        let pole = I * 2.0 * c.big_kp();
        let r = 1e-5;
        // residue by a small circle average of (u - pole) H(u)
        let n = 64;
        let res: C64 = (0..n)
            .map(|j| {
                let w = C64::from_polar(r, 2.0 * PI * j as f64 / n as f64);
                w * c.h_fn(pole + w)
            })
            .sum::<C64>()
            / n as f64;
        assert!((res - 2.0 * c.big_kp() / PI).norm() < 1e-9, "{res}");
    }

    #[test]
    fn landen_relations() {
        let k = 0.83;
        let l = landen_ascent(k).unwrap();
        assert!(((1.0 + l.mu) * (1.0 + l.ell) - 2.0).abs() < 1e-15);
        let (ck, cl) = (ctx(k), ctx(l.ell));
        assert!((ck.big_k() - (1.0 + l.ell) * cl.big_k()).abs() < 1e-13);
        assert!((ck.big_kp() - cl.big_kp() / (1.0 + l.mu)).abs() < 1e-13);
        for &u in &[C64::new(0.3, 0.2), C64::new(1.2, -0.4)] {
            let (s, cn, d) = ck.sncndn(u);
            let rhs = cl.sncndn(u * (1.0 + l.mu)).0 / (1.0 + l.mu);
            assert!((s * cn / d - rhs).norm() < 1e-13);
        }
    }

    #[test]
    fn jacobi_codes_and_errors() {
        let c = ctx(0.5);
        assert!("xy".parse::<Pq>().is_err());
        assert!("ss".parse::<Pq>().is_err());
        let sd: Pq = "sd".parse().unwrap();
        assert_eq!(sd.to_string(), "sd");
        assert!(matches!(c.jacobi("sc".parse().unwrap(), c.big_k().into()), Err(EllipticError::Pole(_))));
        assert!(matches!(c.jacobi(sd, C64::new(f64::NAN, 0.0)), Err(EllipticError::Argument(_))));
        assert!(EllipticContext::new(1.0).is_err());
        assert!(EllipticContext::new(0.0).is_err());
        let u = C64::new(0.3, 0.4);
        let (s, _, d) = c.sncndn(u);
        assert!((c.jacobi(sd, u).unwrap() - s / d).norm() < 1e-15);
    }

    #[test]
    fn identity_battery_small_sample() {
        let c = ctx(0.37);
        for (u, v) in [(C64::new(0.31, 0.42), C64::new(-0.52, 0.17)), (C64::new(1.1, -0.9), C64::new(0.2, 0.6))] {
            for (name, r) in identity_residuals(&c, u, v) {
                assert!(r < 1e-12, "{name}: {r}");
            }
        }
    }

    #[test]
    fn sc_is_finite_on_the_line_im_kp() {
        let ctx = EllipticContext::new(0.6).unwrap();
        let kp = ctx.big_kp();
        assert!((ctx.sc(C64::new(0.0, kp)) - C64::new(0.0, 1.0)).norm() < 1e-14);
        for u in [C64::new(0.7, 0.9 * kp), C64::new(-1.1, 1.3 * kp), C64::new(2.0, -0.7 * kp), C64::new(0.3, 3.2 * kp)] {
            let (s, c, _) = ctx.sncndn(u);
            assert!((ctx.sc(u) - s / c).norm() < 1e-11 * (s / c).norm());
        }
    }
}
