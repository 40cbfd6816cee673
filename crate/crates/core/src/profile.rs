//! Initial data: validation, generators and the conserved quantity c.

use crate::error::{DymError, Result};
use crate::quad;
use crate::spline::CubicSpline;
use serde::{Deserialize, Serialize};

/// Validated initial datum q0 on a strictly increasing grid.
#[derive(Clone, Debug)]
pub struct InitialProfile {
    pub x: Vec<f64>,
    pub q0: Vec<f64>,
    pub u0: Vec<f64>,
    /// max |q0| over the outer 5% of the grid on each side
    pub tail_max: f64,
    /// the two moment integrals (total mass, iterated mass)
    pub moments: [f64; 2],
    spline: CubicSpline,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ProfileOptions {
    pub decay_margin: f64,
    /// absolute moment tolerance; `None` means 1e-6 times the grid span
    pub moment_tol: Option<f64>,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions { decay_margin: 1e-6, moment_tol: None }
    }
}

fn cumulative(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for i in 1..x.len() {
        out[i] = out[i - 1] + 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    }
    out
}

pub fn validate_profile(x: &[f64], q0: &[f64], opt: &ProfileOptions) -> Result<InitialProfile> {
    if x.len() < 64 {
        return Err(DymError::InvalidInput(format!("grid has {} points, need at least 64", x.len())));
    }
    if x.len() != q0.len() {
        return Err(DymError::InvalidInput("x and q0 lengths differ".into()));
    }
    if x.windows(2).any(|w| !(w[1] > w[0])) || x.iter().chain(q0).any(|v| !v.is_finite()) {
        return Err(DymError::InvalidInput("grid must be finite and strictly increasing".into()));
    }
    if let Some((i, _)) = q0.iter().enumerate().find(|(_, &q)| q < -1.0) {
        return Err(DymError::BelowMinusOne { x: x[i] });
    }
    let n = x.len();
    let edge = (n / 20).max(1);
    let tail_max = q0[..edge].iter().chain(&q0[n - edge..]).fold(0.0f64, |m, v| m.max(v.abs()));
    if tail_max > opt.decay_margin {
        return Err(DymError::NonDecaying { tail: tail_max, margin: opt.decay_margin });
    }
    let span = x[n - 1] - x[0];
    let tol = opt.moment_tol.unwrap_or(1e-6 * span);
    let m0 = quad::trapezoid(x, q0);
    let from_left = cumulative(x, q0);
    let m1_left = quad::trapezoid(x, &from_left);
    // ∫ ∫_{+∞}^{x} q0 = -∫ (total - cumulative)
    let from_right: Vec<f64> = from_left.iter().map(|v| v - from_left[n - 1]).collect();
    let m1_right = quad::trapezoid(x, &from_right);
    if m0.abs() > tol {
        return Err(DymError::MomentViolation { which: 1, value: m0, tol });
    }
    let m1 = if m1_left.abs() >= m1_right.abs() { m1_left } else { m1_right };
    if m1.abs() > tol {
        return Err(DymError::MomentViolation { which: 2, value: m1, tol });
    }
    let u0 = q0.iter().map(|q| (1.0 + q).sqrt()).collect();
    Ok(InitialProfile {
        x: x.to_vec(),
        q0: q0.to_vec(),
        u0,
        tail_max,
        moments: [m0, m1],
        spline: CubicSpline::new(x, q0),
    })
}

impl InitialProfile {
    pub fn span(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }

    /// (q, q_x) from the interpolating spline; zero outside the grid.
    pub fn q_and_qx(&self, x: f64) -> (f64, f64) {
        let (a, b) = self.span();
        if x < a || x > b {
            return (0.0, 0.0);
        }
        let (v, d, _) = self.spline.eval3(x);
        (v, d)
    }

    pub fn u_at(&self, x: f64) -> f64 {
        (1.0 + self.q_and_qx(x).0).max(0.0).sqrt()
    }
}

/// c = ∫(u0 − 1) dx by the trapezoid rule on the profile grid.
pub fn conserved_c(p: &InitialProfile) -> f64 {
    let v: Vec<f64> = p.u0.iter().map(|u| u - 1.0).collect();
    quad::trapezoid(&p.x, &v)
}

/// Same quantity by composite Gauss-Legendre on the spline (cross-check).
pub fn conserved_c_gauss(p: &InitialProfile) -> f64 {
    let (a, b) = p.span();
    let rule = quad::uniform_rule(a, b, (p.x.len() / 2).max(8));
    quad::integrate_real(&rule, |x| p.u_at(x) - 1.0)
}

/// One localized component of a generated profile.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct Bump {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

/// Named generator families for q0.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProfileFamily {
    Zero,
    /// Σ A (4z² − 2) e^{−z²}, z = (x − x0)/w: second derivatives of Gaussians
    GaussianSecondDerivative { components: Vec<Bump> },
    /// Σ second derivatives of the compact bump exp(−1/(1 − z²)), scaled so max |q0| = A
    CompactSecondDerivative { components: Vec<Bump> },
    /// A e^{−z²}; not admissible (nonzero mass), kept for validation tests
    Gaussian { components: Vec<Bump> },
}

fn compact_dd(z: f64) -> f64 {
    let d = 1.0 - z * z;
    let g = (-1.0 / d).exp();
    let h1 = -2.0 * z / (d * d);
    let h2 = -2.0 / (d * d) - 8.0 * z * z / (d * d * d);
    g * (h1 * h1 + h2)
}

/// max |g''| of the compact bump, found by sampling.
fn compact_dd_max() -> f64 {
    static M: std::sync::OnceLock<f64> = std::sync::OnceLock::new();
    *M.get_or_init(|| (1..200_000).map(|i| compact_dd(-1.0 + i as f64 * 1e-5).abs()).fold(0.0, f64::max))
}

impl ProfileFamily {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ProfileFamily::Zero => 0.0,
            ProfileFamily::GaussianSecondDerivative { components } => components
                .iter()
                .map(|b| {
                    let z = (x - b.center) / b.width;
                    b.amplitude * (4.0 * z * z - 2.0) * (-z * z).exp()
                })
                .sum(),
            ProfileFamily::CompactSecondDerivative { components } => components
                .iter()
                .map(|b| {
                    let z = (x - b.center) / b.width;
                    if z.abs() >= 1.0 {
                        return 0.0;
                    }
                    b.amplitude * compact_dd(z) / compact_dd_max()
                })
                .sum(),
            ProfileFamily::Gaussian { components } => components
                .iter()
                .map(|b| {
                    let z = (x - b.center) / b.width;
                    b.amplitude * (-z * z).exp()
                })
                .sum(),
        }
    }

    pub fn sample(&self, x_min: f64, x_max: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
        let h = (x_max - x_min) / (n - 1) as f64;
        let x: Vec<f64> = (0..n).map(|i| x_min + h * i as f64).collect();
        let q = x.iter().map(|&v| self.eval(v)).collect();
        (x, q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_profile_is_valid() {
        let (x, q) = ProfileFamily::Zero.sample(-40.0, 40.0, 801);
        let p = validate_profile(&x, &q, &ProfileOptions::default()).unwrap();
        assert!(p.u0.iter().all(|&u| u == 1.0));
        assert_eq!(conserved_c(&p), 0.0);
    }

    #[test]
    fn compact_bump_second_derivative_is_valid() {
        let fam = ProfileFamily::CompactSecondDerivative {
            components: vec![Bump { amplitude: 0.5, center: 0.0, width: 3.0 }],
        };
        let (x, q) = fam.sample(-20.0, 20.0, 4001);
        let p = validate_profile(&x, &q, &ProfileOptions::default()).unwrap();
        let qmax = q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((qmax - 0.5).abs() < 1e-3, "{qmax}");
        assert!(p.moments[0].abs() < 1e-8);
    }

    #[test]
    fn gaussian_fails_moment() {
        let fam = ProfileFamily::Gaussian { components: vec![Bump { amplitude: 0.5, center: 0.0, width: 1.0 }] };
        let (x, q) = fam.sample(-20.0, 20.0, 2001);
        match validate_profile(&x, &q, &ProfileOptions::default()) {
            Err(DymError::MomentViolation { which: 1, value, .. }) => {
                assert!((value - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-6)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn below_minus_one_and_tails_rejected() {
        let (x, mut q) = ProfileFamily::Zero.sample(-10.0, 10.0, 200);
        q[100] = -1.5;
        assert!(matches!(validate_profile(&x, &q, &ProfileOptions::default()), Err(DymError::BelowMinusOne { .. })));
        q[100] = 0.0;
        q[0] = 0.1;
        assert!(matches!(validate_profile(&x, &q, &ProfileOptions::default()), Err(DymError::NonDecaying { .. })));
    }

    #[test]
    fn c_by_two_rules_agree() {
        let fam = ProfileFamily::GaussianSecondDerivative {
            components: vec![Bump { amplitude: 0.3, center: 0.0, width: 1.0 }],
        };
        let (x, q) = fam.sample(-12.0, 12.0, 2401);
        let p = validate_profile(&x, &q, &ProfileOptions::default()).unwrap();
        let c1 = conserved_c(&p);
        let c2 = conserved_c_gauss(&p);
        assert!((c1 - c2).abs() < 1e-6, "{c1} {c2}");
        // fine-grid oracle
        let (xf, qf) = fam.sample(-12.0, 12.0, 24001);
        let uf: Vec<f64> = qf.iter().map(|q| (1.0 + q).sqrt() - 1.0).collect();
        let h = xf[1] - xf[0];
        let cf = quad::simpson_uniform(h, &uf);
        assert!((c2 - cf).abs() < 1e-8, "{c2} {cf}");
    }
}
