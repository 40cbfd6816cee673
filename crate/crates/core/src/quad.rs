//! Quadrature rules.

use crate::linalg::{C64, ZERO};
use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn gl20() -> &'static (Vec<f64>, Vec<f64>) {
    static R: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(20))
}

/// Composite nodes/weights on [a, b] whose panels shrink geometrically toward
/// both endpoints and toward each interior point in `focus`.
pub fn graded_rule(a: f64, b: f64, focus: &[f64], levels: usize) -> Vec<(f64, f64)> {
    let mut breaks = vec![a, b];
    for &f in focus {
        if f > a && f < b {
            breaks.push(f);
        }
    }
    breaks.sort_by(|p, q| p.partial_cmp(q).unwrap());
    breaks.dedup();
    let mut panels: Vec<f64> = Vec::new();
    for win in breaks.windows(2) {
        let (l, r) = (win[0], win[1]);
        let len = r - l;
        // geometric grading from both ends of each sub-interval
        let mut pts = vec![l, r, 0.5 * (l + r)];
        let mut h = 0.5 * len;
        for _ in 0..levels {
            h *= 0.5;
            pts.push(l + h);
            pts.push(r - h);
        }
        pts.sort_by(|p, q| p.partial_cmp(q).unwrap());
        pts.dedup();
        panels.extend(pts);
    }
    panels.sort_by(|p, q| p.partial_cmp(q).unwrap());
    panels.dedup();
    let (gx, gw) = gl20();
    let mut out = Vec::with_capacity(panels.len() * gx.len());
    for win in panels.windows(2) {
        let (l, r) = (win[0], win[1]);
        if r <= l {
            continue;
        }
        let m = 0.5 * (l + r);
        let h = 0.5 * (r - l);
        for (xi, wi) in gx.iter().zip(gw.iter()) {
            let x = m + h * xi;
            // panels near the ulp scale can round a node onto a break point
            if x > l && x < r {
                out.push((x, h * wi));
            }
        }
    }
    out
}

/// Uniform composite Gauss-Legendre on [a, b] with `panels` panels.
pub fn uniform_rule(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let (gx, gw) = gl20();
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * gx.len());
    for p in 0..panels {
        let l = a + p as f64 * h;
        let m = l + 0.5 * h;
        for (xi, wi) in gx.iter().zip(gw.iter()) {
            out.push((m + 0.5 * h * xi, 0.5 * h * wi));
        }
    }
    out
}

pub fn integrate_real(rule: &[(f64, f64)], f: impl Fn(f64) -> f64) -> f64 {
    rule.iter().map(|&(x, w)| w * f(x)).sum()
}

pub fn integrate_complex(rule: &[(f64, f64)], f: impl Fn(f64) -> C64) -> C64 {
    rule.iter().fold(ZERO, |acc, &(x, w)| acc + f(x) * w)
}

/// Trapezoid rule on samples over a (possibly non-uniform) grid.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(xw, yw)| 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1])).sum()
}

/// Composite Simpson on a uniform grid; falls back to a trapezoid on the last
/// interval when the interval count is odd.
pub fn simpson_uniform(h: f64, y: &[f64]) -> f64 {
    let n = y.len();
    if n < 3 {
        return if n == 2 { 0.5 * h * (y[0] + y[1]) } else { 0.0 };
    }
    let m = if (n - 1) % 2 == 0 { n } else { n - 1 };
    let mut s = y[0] + y[m - 1];
    for (i, v) in y.iter().enumerate().take(m - 1).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    let mut total = s * h / 3.0;
    if m < n {
        total += 0.5 * h * (y[n - 2] + y[n - 1]);
    }
    total
}

/// Trapezoid rule on a circle |z - z0| = rho with `n` nodes; exponentially
/// accurate for periodic analytic integrands. Returns (1/2 pi i) of the integral.
pub fn circle_integral(z0: C64, rho: f64, n: usize, mut f: impl FnMut(C64) -> C64) -> C64 {
    let mut acc = ZERO;
    for k in 0..n {
        let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        let e = C64::from_polar(1.0, th);
        let z = z0 + e * rho;
        // dz = i rho e dθ, so (1/2πi) f dz = f rho e dθ / 2π
        acc += f(z) * e * rho;
    }
    acc / n as f64
}
