//! One-dimensional quadrature: double-exponential (tanh-sinh) for integrands
//! with endpoint singularities, Gauss–Legendre for smooth ones, and the
//! periodic trapezoid rule.

use std::f64::consts::FRAC_PI_2;

/// Tanh–sinh quadrature of `f` over `[a, b]`.
///
/// Halves the step until two successive levels agree to `tol` (relative to
/// `max(1, |I|)`). Integrable endpoint singularities are fine; `f` is never
/// evaluated exactly at an endpoint. Non-finite samples are skipped.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let tmax = 3.5;
    // Node at abscissa t: x = mid ± half * (1 - d) with d = 1 - tanh(pi/2 sinh t),
    // computed as 2 / (1 + exp(pi sinh t)) to keep precision near the ends.
    let eval = |t: f64| -> f64 {
        let s = FRAC_PI_2 * t.sinh();
        let c = FRAC_PI_2 * t.cosh();
        let e = (2.0 * s).exp();
        let d = 2.0 / (1.0 + e); // distance to the right end, scaled
        let w = c * 4.0 * e / ((1.0 + e) * (1.0 + e)); // sech^2 * c
        if w == 0.0 || !w.is_finite() {
            return 0.0;
        }
        let right = b - half * d;
        let left = a + half * d;
        let mut acc = 0.0;
        for x in [right, left] {
            if x > a && x < b {
                let v = f(x);
                if v.is_finite() {
                    acc += v;
                }
            }
        }
        acc * w
    };
    let mut h = 0.5;
    let mut sum = f(mid) * FRAC_PI_2;
    let mut k = 1;
    while k as f64 * h <= tmax {
        sum += eval(k as f64 * h);
        k += 1;
    }
    let mut prev = sum * h * half;
    for _ in 0..10 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= tmax {
            sum += eval(k as f64 * h);
            k += 2;
        }
        let cur = sum * h * half;
        if (cur - prev).abs() <= tol * cur.abs().max(1.0) {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        xs[i] = x;
        xs[n - 1 - i] = -x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        ws[i] = w;
        ws[n - 1 - i] = w;
    }
    (xs, ws)
}

/// Composite Gauss–Legendre over `panels` equal sub-intervals of `[a, b]`.
pub fn gauss_composite<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, order: usize, panels: usize) -> f64 {
    let (xs, ws) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (x, w) in xs.iter().zip(&ws) {
            acc += w * f(lo + 0.5 * h * (x + 1.0));
        }
    }
    acc * 0.5 * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tanh_sinh_log_singularity() {
        // ∫_0^1 ln x dx = -1
        let v = tanh_sinh(|x| x.ln(), 0.0, 1.0, 1e-14);
        assert!((v + 1.0).abs() < 1e-13, "{v}");
        // ∫_0^{π/2} ln sin x dx = -π/2 ln 2
        let v = tanh_sinh(|x| x.sin().ln(), 0.0, FRAC_PI_2, 1e-14);
        assert!((v + FRAC_PI_2 * 2f64.ln()).abs() < 1e-13, "{v}");
    }

    #[test]
    fn gauss_is_exact_for_polynomials() {
        let (xs, ws) = gauss_legendre(8);
        let s: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        let s: f64 = ws.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let v = gauss_composite(f64::exp, 0.0, 1.0, 10, 3);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-14);
    }
}
