//! Jost solutions and scattering coefficients.
//!
//! The Lax equation is written along a real parameter s as
//! Ψ_s = −iλ g(s) [σ3, Ψ] + U(s) σ1 Ψ, with g = dp/ds for the phase variable p.
//! On the physical line g = u and U = u_x/(2u); on a shifted line in the
//! reciprocal variable y one has g = 1 and U = u_y/(2u).

use crate::error::{DymError, Result};
use crate::linalg::{C64, I, ONE, ZERO};
use crate::ode::{self, OdeOptions};
use crate::profile::{conserved_c, InitialProfile};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A path along which the Lax equation is integrated.
pub trait LaxPath: Sync {
    /// Parameter interval [s_left, s_right].
    fn span(&self) -> (f64, f64);
    /// (g, U) at parameter s.
    fn coeffs(&self, s: f64) -> (C64, C64);
    /// Phase variable at the right end of the path.
    fn phase_right(&self) -> C64;
    /// Matching point for the Wronskians.
    fn match_point(&self) -> f64 {
        let (a, b) = self.span();
        0.5 * (a + b)
    }
    fn max_step(&self) -> f64 {
        0.5
    }
}

impl LaxPath for InitialProfile {
    fn span(&self) -> (f64, f64) {
        InitialProfile::span(self)
    }
    fn coeffs(&self, x: f64) -> (C64, C64) {
        let (q, qx) = self.q_and_qx(x);
        let u2 = (1.0 + q).max(1e-300);
        // U = u_x / (2u) = q_x / (4 u²)
        (C64::new(u2.sqrt(), 0.0), C64::new(qx / (4.0 * u2), 0.0))
    }
    fn phase_right(&self) -> C64 {
        // y = x − ∫_x^∞ (u − 1); the tail beyond the grid is below the decay margin
        C64::new(self.span().1, 0.0)
    }
}

/// Jost columns at the matching point.
#[derive(Clone, Copy, Debug)]
pub struct JostAtMatch {
    /// Ψ−^(1), normalized to (1, 0) at the left end
    pub minus1: [C64; 2],
    /// Ψ+^(2), normalized to (0, 1) at the right end
    pub plus2: [C64; 2],
    /// Ψ+^(1), only on the real axis
    pub plus1: Option<[C64; 2]>,
    /// phase variable p at the match point
    pub phase: C64,
}

fn ode_fail(e: ode::OdeFailure, lambda: C64) -> DymError {
    DymError::OdeDivergence { at: e.at, lambda: format!("{lambda}") }
}

/// Integrate the Jost columns to the matching point.
///
/// Real λ use the integrating factor exp(±2iλ∫g) so that the state is frozen
/// where U vanishes; off the axis the direct form is used because it is
/// the numerically stable direction for the analytic columns.
pub fn jost_at_match<P: LaxPath + ?Sized>(path: &P, lambda: C64, opt: &OdeOptions) -> Result<JostAtMatch> {
    let (sl, sr) = path.span();
    let sm = path.match_point();
    let opt = OdeOptions { h_max: opt.h_max.min(path.max_step()), ..*opt };
    let two_i_lam = I * lambda * 2.0;
    if lambda.im == 0.0 {
        // state: (m1, n2, φ) with m2 = e^{2iλφ} n2, φ = ∫_{sl}^{s} g
        let rhs_m = |s: f64, y: &[C64; 3]| {
            let (g, u) = path.coeffs(s);
            let e = (two_i_lam * y[2]).exp();
            [u * e * y[1], u * y[0] / e, g]
        };
        let (ym, _) = ode::integrate(rhs_m, sl, sm, [ONE, ZERO, ZERO], &opt).map_err(|e| ode_fail(e, lambda))?;
        let minus1 = [ym[0], (two_i_lam * ym[2]).exp() * ym[1]];
        // Ψ+^(2): (n1, p2, φ) with p1 = e^{−2iλφ} n1, φ = −∫_s^{sr} g
        let rhs_p = |s: f64, y: &[C64; 3]| {
            let (g, u) = path.coeffs(s);
            let e = (two_i_lam * y[2]).exp();
            [u * e * y[1], u * y[0] / e, g]
        };
        let (yp, _) = ode::integrate(rhs_p, sr, sm, [ZERO, ONE, ZERO], &opt).map_err(|e| ode_fail(e, lambda))?;
        let plus2 = [(-two_i_lam * yp[2]).exp() * yp[0], yp[1]];
        let (yq, _) = ode::integrate(rhs_m, sr, sm, [ONE, ZERO, ZERO], &opt).map_err(|e| ode_fail(e, lambda))?;
        let plus1 = [yq[0], (two_i_lam * yq[2]).exp() * yq[1]];
        let phase = path.phase_right() + yp[2];
        Ok(JostAtMatch { minus1, plus2, plus1: Some(plus1), phase })
    } else {
        let rhs_col1 = |s: f64, y: &[C64; 2]| {
            let (g, u) = path.coeffs(s);
            [u * y[1], two_i_lam * g * y[1] + u * y[0]]
        };
        let rhs_col2 = |s: f64, y: &[C64; 3]| {
            let (g, u) = path.coeffs(s);
            [-two_i_lam * g * y[0] + u * y[1], u * y[0], g]
        };
        let (ym, _) = ode::integrate(rhs_col1, sl, sm, [ONE, ZERO], &opt).map_err(|e| ode_fail(e, lambda))?;
        let (yp, _) = ode::integrate(rhs_col2, sr, sm, [ZERO, ONE, ZERO], &opt).map_err(|e| ode_fail(e, lambda))?;
        let phase = path.phase_right() + yp[2];
        Ok(JostAtMatch { minus1: ym, plus2: [yp[0], yp[1]], plus1: None, phase })
    }
}

fn det(a: [C64; 2], b: [C64; 2]) -> C64 {
    a[0] * b[1] - a[1] * b[0]
}

/// a(λ) = det(Ψ−^(1), Ψ+^(2)); valid for Im λ ≥ 0.
pub fn a_of<P: LaxPath + ?Sized>(path: &P, lambda: C64, opt: &OdeOptions) -> Result<C64> {
    let j = jost_at_match(path, lambda, opt)?;
    Ok(det(j.minus1, j.plus2))
}

/// Scattering coefficients at one real λ.
#[derive(Clone, Copy, Debug)]
pub struct ScatteringSample {
    pub lambda: f64,
    pub a: C64,
    pub b: C64,
    /// |det(Ψ+^(1), Ψ+^(2)) − 1| at the matching point
    pub det_err: f64,
}

pub fn scatter_real<P: LaxPath + ?Sized>(path: &P, lambda: f64, opt: &OdeOptions) -> Result<ScatteringSample> {
    let lam = C64::new(lambda, 0.0);
    let j = jost_at_match(path, lam, opt)?;
    let plus1 = j.plus1.expect("real lambda yields the first plus column");
    let a = det(j.minus1, j.plus2);
    let b = (-I * lam * 2.0 * j.phase).exp() * det(plus1, j.minus1);
    let det_err = (det(plus1, j.plus2) - ONE).norm();
    Ok(ScatteringSample { lambda, a, b, det_err })
}

/// b(λ_n) at a zero of a in the upper half-plane: the proportionality
/// Ψ−^(1) = b_n e^{2iλ_n p} Ψ+^(2), read off by least squares at the matching point.
pub fn b_at_zero<P: LaxPath + ?Sized>(path: &P, lambda: C64, opt: &OdeOptions) -> Result<C64> {
    let j = jost_at_match(path, lambda, opt)?;
    let num = j.plus2[0].conj() * j.minus1[0] + j.plus2[1].conj() * j.minus1[1];
    let den = j.plus2[0].norm_sqr() + j.plus2[1].norm_sqr();
    Ok(num / den * (-I * lambda * 2.0 * j.phase).exp())
}

/// Reflection data on a real grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScatteringData {
    pub lambda: Vec<f64>,
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    pub r: Vec<C64>,
    pub c: f64,
    pub unitarity_max_err: f64,
    pub det_max_err: f64,
}

impl ScatteringData {
    /// Build from reflection samples only; a is taken real positive with |a|² = 1/(1 − |r|²).
    pub fn from_reflection(lambda: Vec<f64>, r: Vec<C64>) -> Result<Self> {
        let mut a = Vec::with_capacity(r.len());
        let mut b = Vec::with_capacity(r.len());
        for (l, rr) in lambda.iter().zip(&r) {
            let m = rr.norm_sqr();
            if m >= 1.0 {
                return Err(DymError::ReflectionAtUnit { at: *l });
            }
            let aa = C64::new((1.0 / (1.0 - m)).sqrt(), 0.0);
            a.push(aa);
            b.push(rr * aa);
        }
        Ok(ScatteringData { lambda, a, b, r, c: 0.0, unitarity_max_err: 0.0, det_max_err: 0.0 })
    }

    /// max over the grid of |a(−λ) − conj a(λ)| and |b(−λ) − conj b(λ)|, matching
    /// grid points by value.
    pub fn symmetry_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, &l) in self.lambda.iter().enumerate() {
            if l <= 0.0 {
                continue;
            }
            if let Some(j) = self.lambda.iter().position(|&m| m == -l) {
                worst = worst.max((self.a[j] - self.a[i].conj()).norm());
                worst = worst.max((self.b[j] - self.b[i].conj()).norm());
            }
        }
        worst
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ScatterOptions {
    pub ode: OdeSettings,
    pub unitarity_tol: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OdeSettings {
    pub rtol: f64,
    pub atol: f64,
}

impl From<OdeSettings> for OdeOptions {
    fn from(s: OdeSettings) -> Self {
        OdeOptions { rtol: s.rtol, atol: s.atol, ..Default::default() }
    }
}

impl Default for ScatterOptions {
    fn default() -> Self {
        ScatterOptions { ode: OdeSettings { rtol: 1e-9, atol: 1e-12 }, unitarity_tol: 1e-6 }
    }
}

/// Scattering data along an arbitrary path; λ = 0 must not be on the grid.
pub fn scattering_on_path<P: LaxPath + ?Sized>(path: &P, grid: &[f64], opt: &ScatterOptions) -> Result<ScatteringData> {
    if grid.iter().any(|&l| l == 0.0 || !l.is_finite()) {
        return Err(DymError::InvalidInput("lambda grid must avoid 0".into()));
    }
    let ode_opt: OdeOptions = opt.ode.into();
    let samples: Vec<ScatteringSample> =
        grid.par_iter().map(|&l| scatter_real(path, l, &ode_opt)).collect::<Result<Vec<_>>>()?;
    let mut unit = 0.0f64;
    let mut dete = 0.0f64;
    for s in &samples {
        unit = unit.max((s.a.norm_sqr() - s.b.norm_sqr() - 1.0).abs());
        dete = dete.max(s.det_err);
    }
    Ok(ScatteringData {
        lambda: grid.to_vec(),
        a: samples.iter().map(|s| s.a).collect(),
        b: samples.iter().map(|s| s.b).collect(),
        r: samples.iter().map(|s| s.b / s.a).collect(),
        c: 0.0,
        unitarity_max_err: unit,
        det_max_err: dete,
    })
}

/// Scattering coefficients of a validated profile at t = 0.
pub fn scattering_coefficients(profile: &InitialProfile, grid: &[f64], opt: &ScatterOptions) -> Result<ScatteringData> {
    let mut d = scattering_on_path(profile, grid, opt)?;
    d.c = conserved_c(profile);
    if d.unitarity_max_err > opt.unitarity_tol {
        return Err(DymError::UnitarityViolation { err: d.unitarity_max_err, tol: opt.unitarity_tol });
    }
    Ok(d)
}

/// Symmetric grid ±(k·λmax/m), k = 1..m; 2m points, zero excluded.
pub fn symmetric_grid(lambda_max: f64, m: usize) -> Vec<f64> {
    let mut g: Vec<f64> = (1..=m).rev().map(|k| -lambda_max * k as f64 / m as f64).collect();
    g.extend((1..=m).map(|k| lambda_max * k as f64 / m as f64));
    g
}
