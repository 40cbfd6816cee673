//! Adaptive Dormand-Prince 5(4) for small complex systems.

use crate::linalg::C64;

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-9, atol: 1e-12, h_init: 1e-2, h_max: 1.0, max_steps: 200_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeFailure {
    pub at: f64,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn lin<const N: usize>(y: &[C64; N], terms: &[(f64, &[C64; N])], h: f64) -> [C64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += k[i] * (h * c);
        }
    }
    out
}

/// Integrate y' = f(s, y) from s0 to s1 (either direction).
pub fn integrate<const N: usize>(
    f: impl Fn(f64, &[C64; N]) -> [C64; N],
    s0: f64,
    s1: f64,
    y0: [C64; N],
    opt: &OdeOptions,
) -> Result<([C64; N], OdeStats), OdeFailure> {
    let mut stats = OdeStats::default();
    if s0 == s1 {
        return Ok((y0, stats));
    }
    let dir = if s1 > s0 { 1.0 } else { -1.0 };
    let span = (s1 - s0).abs();
    let mut s = s0;
    let mut y = y0;
    let mut h = opt.h_init.min(span).min(opt.h_max) * dir;
    let mut k1 = f(s, &y);
    let mut steps = 0usize;
    while (s1 - s) * dir > 0.0 {
        steps += 1;
        if steps > opt.max_steps {
            return Err(OdeFailure { at: s });
        }
        if (s + h - s1) * dir > 0.0 {
            h = s1 - s;
        }
        let k2 = f(s + C2 * h, &lin(&y, &[(A21, &k1)], h));
        let k3 = f(s + C3 * h, &lin(&y, &[(A31, &k1), (A32, &k2)], h));
        let k4 = f(s + C4 * h, &lin(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
        let k5 = f(s + C5 * h, &lin(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h));
        let k6 = f(s + h, &lin(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h));
        let yn = lin(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h);
        let k7 = f(s + h, &yn);
        let mut err = 0.0f64;
        for i in 0..N {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let sc = opt.atol + opt.rtol * y[i].norm().max(yn[i].norm());
            err = err.max(e.norm() / sc);
        }
        if !err.is_finite() {
            stats.rejected += 1;
            h *= 0.25;
            if h.abs() < 1e-14 * span.max(1.0) {
                return Err(OdeFailure { at: s });
            }
            continue;
        }
        if err <= 1.0 {
            s += h;
            y = yn;
            k1 = k7;
            stats.accepted += 1;
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * fac).abs().min(opt.h_max) * dir;
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h.abs() < 1e-14 * span.max(1.0) {
                return Err(OdeFailure { at: s });
            }
        }
    }
    Ok((y, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn exponential_growth_forward_and_back() {
        let opt = OdeOptions { rtol: 1e-11, atol: 1e-14, ..Default::default() };
        let lam = c(0.3, 2.0);
        let (y, _) = integrate(|_, y: &[C64; 1]| [lam * y[0]], 0.0, 3.0, [c(1.0, 0.0)], &opt).unwrap();
        assert!((y[0] - (lam * 3.0).exp()).norm() < 1e-9);
        let (z, _) = integrate(|_, y: &[C64; 1]| [lam * y[0]], 3.0, 0.0, y, &opt).unwrap();
        assert!((z[0] - c(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn harmonic_oscillator_energy() {
        let opt = OdeOptions { rtol: 1e-10, atol: 1e-13, ..Default::default() };
        let (y, st) = integrate(
            |_, y: &[C64; 2]| [y[1], -y[0]],
            0.0,
            10.0,
            [c(1.0, 0.0), c(0.0, 0.0)],
            &opt,
        )
        .unwrap();
        assert!((y[0].re - 10f64.cos()).abs() < 1e-8);
        assert!(st.accepted > 10);
    }
}
