//! Phase geometry, parabolic-cylinder coefficients, error terms and the
//! long-time formula inside a cone.

use crate::conjugation::{primed_constants, stationary_point, ConjugationContext, Reflection};
use crate::error::{DymError, Result};
use crate::gamma::gamma;
use crate::linalg::{c, Mat2, C64, I, ONE, ZERO};
use crate::quad::{circle_integral, graded_rule, integrate_real};
use crate::soliton::{
    grows_on_ray, reconstruct, select_interval, soliton_sample, solve_reflectionless, Cone, ReflectionlessData,
    ResidueVariant,
};
use crate::spectrum::DiscreteSpectrum;
use crate::spline::CubicSpline;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Re(2iθ) = 8 Im λ ((Im λ)² + 3(λ0² − (Re λ)²)).
pub fn re_2i_theta(lambda: C64, lambda0: f64) -> f64 {
    let (a, b) = (lambda.re, lambda.im);
    8.0 * b * (b * b + 3.0 * (lambda0 * lambda0 - a * a))
}

/// Re(2i(4λ³ − 12λλ0²)) evaluated in complex arithmetic.
pub fn re_2i_theta_direct(lambda: C64, lambda0: f64) -> f64 {
    let th = lambda * lambda * lambda * 4.0 - lambda * (12.0 * lambda0 * lambda0);
    (I * 2.0 * th).re
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhaseGeometry {
    pub lambda0: f64,
    pub y_over_t: f64,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    /// sign[i][j] at (re[j], im[i])
    pub sign: Vec<Vec<i8>>,
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n.max(2) - 1) as f64).collect()
}

/// Sign table of Re(2iθ) on a rectangle.
pub fn phase_signature(y: f64, t: f64, re: (f64, f64), im: (f64, f64), n_re: usize, n_im: usize) -> Result<PhaseGeometry> {
    if n_re < 2 || n_im < 2 || !(re.1 > re.0) || !(im.1 > im.0) {
        return Err(DymError::InvalidInput("degenerate signature grid".into()));
    }
    let pp = stationary_point(y, t)?;
    let res = linspace(re.0, re.1, n_re);
    let ims = linspace(im.0, im.1, n_im);
    let sign = ims
        .iter()
        .map(|&b| {
            res.iter()
                .map(|&a| {
                    let v = re_2i_theta(c(a, b), pp.lambda0);
                    if v > 0.0 {
                        1
                    } else if v < 0.0 {
                        -1
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect();
    Ok(PhaseGeometry { lambda0: pp.lambda0, y_over_t: pp.y_over_t, re: res, im: ims, sign })
}

impl PhaseGeometry {
    /// Midpoints of neighbouring grid pairs whose signs differ (zeros included).
    pub fn sign_changes(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for i in 0..self.im.len() {
            for j in 0..self.re.len() {
                let s = self.sign[i][j];
                if j + 1 < self.re.len() && s != self.sign[i][j + 1] {
                    out.push((0.5 * (self.re[j] + self.re[j + 1]), self.im[i]));
                }
                if i + 1 < self.im.len() && s != self.sign[i + 1][j] {
                    out.push((self.re[j], 0.5 * (self.im[i] + self.im[i + 1])));
                }
            }
        }
        out
    }

    /// Number of detected sign changes that lie farther than one grid cell
    /// from Im λ = 0 and from the hyperbola (Im λ)² = 3((Re λ)² − λ0²).
    pub fn locus_mismatches(&self) -> usize {
        let dx = self.re[1] - self.re[0];
        let dy = self.im[1] - self.im[0];
        let cell = dx.hypot(dy);
        self.sign_changes()
            .into_iter()
            .filter(|&(a, b)| b.abs() > dy && hyperbola_distance(a, b, self.lambda0) > cell)
            .count()
    }
}

/// Euclidean distance from (a, b) to the hyperbola (Im λ)² = 3((Re λ)² − λ0²),
/// parametrized as (±λ0 cosh τ, √3 λ0 sinh τ).
pub fn hyperbola_distance(a: f64, b: f64, lambda0: f64) -> f64 {
    let (a, b) = (a.abs(), b.abs());
    let d = |tau: f64| (lambda0 * tau.cosh() - a).hypot(3f64.sqrt() * lambda0 * tau.sinh() - b);
    // coarse scan then golden-section refinement
    let n = 400;
    let hi = ((a.max(b) / lambda0).max(1.0) * 4.0).asinh() + 1.0;
    let mut best = (0.0, d(0.0));
    for k in 0..=n {
        let tau = hi * k as f64 / n as f64;
        let v = d(tau);
        if v < best.1 {
            best = (tau, v);
        }
    }
    let step = hi / n as f64;
    let (mut lo, mut up) = ((best.0 - step).max(0.0), best.0 + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let m1 = up - g * (up - lo);
        let m2 = lo + g * (up - lo);
        if d(m1) < d(m2) {
            up = m2;
        } else {
            lo = m1;
        }
    }
    d(0.5 * (lo + up)).min(best.1)
}

/// Coefficients of the parabolic-cylinder local models at ±λ0.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LocalModelCoeffs {
    pub lambda0: f64,
    pub t: f64,
    pub nu: f64,
    pub beta21: C64,
    /// 1/λ̃ coefficient of the model at +λ0 (off-diagonal)
    pub m1b: Mat2,
    pub m1a: Mat2,
    /// η̃(±λ0); purely imaginary for real η
    pub eta_tilde_plus: C64,
    pub eta_tilde_minus: C64,
    pub delta_a0: C64,
    pub delta_b0: C64,
}

/// β21 = r(λ0) Γ(−iν) ν / (√(2π) e^{iπ/4} e^{−πν/2}); zero when ν = 0.
pub fn beta21(r0: C64, nu: f64) -> Result<C64> {
    if nu < 0.0 || !nu.is_finite() {
        return Err(DymError::GammaPole { nu });
    }
    if nu == 0.0 || r0 == ZERO {
        return Ok(ZERO);
    }
    let den = (2.0 * PI).sqrt() * (I * PI / 4.0).exp() * (-PI * nu / 2.0).exp();
    Ok(r0 * gamma(c(0.0, -nu)) * nu / den)
}

pub fn parabolic_coeffs(
    r0: C64,
    nu: f64,
    eta_tilde_minus: C64,
    eta_tilde_plus: C64,
    lambda0: f64,
    t: f64,
) -> Result<LocalModelCoeffs> {
    if !(t > 0.0) || !(lambda0 > 0.0) {
        return Err(DymError::InvalidInput("t and lambda0 must be positive".into()));
    }
    let b = beta21(r0, nu)?;
    let m1b = Mat2::new(ZERO, I * b.conj(), -I * b, ZERO);
    let m1a = -m1b.conj();
    let big = 192.0 * t * lambda0.powi(3);
    let osc = 8.0 * t * lambda0.powi(3);
    let delta_a0 = (I * (nu / 2.0) * big.ln()).exp() * (-I * osc).exp() * eta_tilde_minus.exp();
    let delta_b0 = (-I * (nu / 2.0) * big.ln()).exp() * (I * osc).exp() * eta_tilde_plus.exp();
    Ok(LocalModelCoeffs { lambda0, t, nu, beta21: b, m1b, m1a, eta_tilde_plus, eta_tilde_minus, delta_a0, delta_b0 })
}

impl LocalModelCoeffs {
    /// Model coefficient at ±λ0 in the original frame: δ0^{σ3} M1 δ0^{−σ3},
    /// with (M1B, δB0) at +λ0 and (M1A, δA0) at −λ0.
    pub fn m1_at(&self, sign: f64) -> Mat2 {
        let (m, d) = if sign > 0.0 { (self.m1b, self.delta_b0) } else { (self.m1a, self.delta_a0) };
        let d2 = d * d;
        Mat2::new(m.0[0][0], m.0[0][1] * d2, m.0[1][0] / d2, m.0[1][1])
    }

    /// Coefficient at ±λ0 in the convention that matches direct simulation:
    /// δB0^{−σ3} M1A δB0^{σ3} at +λ0 and δA0^{−σ3} M1B δA0^{σ3} at −λ0.
    pub fn m1_at_matched(&self, sign: f64) -> Mat2 {
        let (m, d) = if sign > 0.0 { (self.m1a, self.delta_b0) } else { (self.m1b, self.delta_a0) };
        let d2 = d * d;
        Mat2::new(m.0[0][0], m.0[0][1] / d2, m.0[1][0] * d2, m.0[1][1])
    }
}

/// η̃(±λ0) after integrating by parts: i ∫ η(s)/(s ∓ λ0) ds plus the
/// boundary term from the opposite endpoint.
pub fn eta_tilde(ctx: &ConjugationContext, sign: f64) -> C64 {
    let l0 = ctx.lambda0;
    let p = sign * l0;
    let rule = graded_rule(-l0, l0, &[p], 48);
    let body = integrate_real(&rule, |s| ctx.eta(s) / (s - p));
    // −i [log|p − s| η(s)] from −λ0 to λ0, the singular endpoint has η = 0
    let boundary = if sign > 0.0 { (2.0 * l0).ln() * ctx.eta(-l0) } else { -(2.0 * l0).ln() * ctx.eta(l0) };
    I * (body + boundary)
}

/// η̃(±λ0) = −(1/2πi) ∫ log|±λ0 − s| d log(1 − |r(s)|²), with the log
/// interpolated by a cubic spline on `n` uniform nodes.
pub fn eta_tilde_stieltjes(ctx: &ConjugationContext, sign: f64, n: usize) -> C64 {
    let l0 = ctx.lambda0;
    let p = sign * l0;
    let xs = linspace(-l0, l0, n.max(8));
    let r = ctx.reflection();
    let ls: Vec<f64> = xs.iter().map(|&s| (1.0 - r.at(s).norm_sqr()).ln()).collect();
    let spl = CubicSpline::new(&xs, &ls);
    let rule = graded_rule(-l0, l0, &[p], 48);
    let v = integrate_real(&rule, |s| (p - s).abs().ln() * spl.deriv(s));
    -c(v, 0.0) / (I * 2.0 * PI)
}

/// Coefficients of |t|^{−1/2} in E(0) and in E₁.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ErrorTerms {
    pub e1: Mat2,
    /// sign pattern as printed: +(−λ0 term) − (+λ0 term)
    pub e2: Mat2,
    /// residue evaluation of the same contour integral: both terms positive
    pub e2_residue: Mat2,
    /// E1 and E2 (residue form) with `m1_at_matched` and the opposite overall sign
    pub e1_matched: Mat2,
    pub e2_matched: Mat2,
}

fn conj_by(m: &Mat2, x: &Mat2) -> Result<Mat2> {
    let inv = m.inv().ok_or(DymError::SingularOuter { at: f64::NAN })?;
    Ok(inv * *x * *m)
}

pub fn error_terms(mout_minus: &Mat2, mout_plus: &Mat2, k: &LocalModelCoeffs) -> Result<ErrorTerms> {
    let l0 = k.lambda0;
    let at_minus = conj_by(mout_minus, &k.m1_at(-1.0)).map_err(|_| DymError::SingularOuter { at: -l0 })?;
    let at_plus = conj_by(mout_plus, &k.m1_at(1.0)).map_err(|_| DymError::SingularOuter { at: l0 })?;
    let mt_minus = conj_by(mout_minus, &k.m1_at_matched(-1.0)).map_err(|_| DymError::SingularOuter { at: -l0 })?;
    let mt_plus = conj_by(mout_plus, &k.m1_at_matched(1.0)).map_err(|_| DymError::SingularOuter { at: l0 })?;
    let s3 = c(1.0 / (48.0 * l0.powi(3)).sqrt(), 0.0);
    let s5 = c(1.0 / (48.0 * l0.powi(5)).sqrt(), 0.0);
    Ok(ErrorTerms {
        e1: (at_plus - at_minus).scale(s3),
        e2: (at_minus - at_plus).scale(s5),
        e2_residue: (at_minus + at_plus).scale(s5),
        e1_matched: (mt_minus - mt_plus).scale(s3),
        e2_matched: -(mt_minus + mt_plus).scale(s5),
    })
}

/// Brute-force (E1, E2) by the trapezoid rule on circles of radius `rho`
/// around ±λ0 (counterclockwise), for an outer matrix analytic there.
pub fn error_terms_quadrature(
    mout: &dyn Fn(C64) -> Mat2,
    k: &LocalModelCoeffs,
    rho: f64,
    n: usize,
) -> Result<(Mat2, Mat2)> {
    let l0 = k.lambda0;
    let norm = c((48.0 * l0).sqrt(), 0.0);
    let mut e1 = Mat2::ZERO;
    let mut e2 = Mat2::ZERO;
    for sign in [-1.0, 1.0] {
        let x = k.m1_at(sign);
        let centre = c(sign * l0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                let mut fail = None;
                let f1 = circle_integral(centre, rho, n, |s| {
                    let m = mout(s);
                    match m.inv() {
                        Some(inv) => (inv * x * m).0[i][j] / (s * (s - centre) * norm),
                        None => {
                            fail = Some(s.re);
                            ZERO
                        }
                    }
                });
                let f2 = circle_integral(centre, rho, n, |s| {
                    let m = mout(s);
                    match m.inv() {
                        Some(inv) => (inv * x * m).0[i][j] / (s * s * (s - centre) * norm),
                        None => ZERO,
                    }
                });
                if let Some(at) = fail {
                    return Err(DymError::SingularOuter { at });
                }
                e1.0[i][j] += f1;
                e2.0[i][j] += f2;
            }
        }
    }
    Ok((e1, e2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QReading {
    /// q̂ = m1²m2² − 1 (the outer model already carries the solitons)
    #[default]
    OuterOnly,
    /// q̂ = q̂_sol(σ_I) + m1²m2² − 1, as printed
    WithSolitonTerm,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AsymptoticOptions {
    pub t_min: f64,
    pub reading: QReading,
}

impl Default for AsymptoticOptions {
    fn default() -> Self {
        AsymptoticOptions { t_min: 10.0, reading: QReading::OuterOnly }
    }
}

/// The quantities m1..m6 in the column-sum normalization of this crate:
/// m1 = (M11 + M21)T(0), m2 = (M12 + M22)T(0), and m4, m6 carry the sign so
/// that q̂ = m1²m2² − 1 and (m3 − m4)/(m5 − m6) keep their printed form.
pub fn m_list(mout0: &Mat2, t0: C64, t1: C64, e2: &Mat2, t: f64) -> [C64; 6] {
    let m = mout0.0;
    let em = (*e2 * *mout0).0;
    let tau = 1.0 / t.sqrt();
    [
        (m[0][0] + m[1][0]) * t0,
        (m[0][1] + m[1][1]) * t0,
        m[0][0] * t0 * t1 + em[0][0] * t0 * tau,
        -(m[1][0] * t0 * t1 + em[1][0] * t0 * tau),
        m[0][1] * t0 * t1 + em[0][1] * t0 * tau,
        -(m[1][1] * t0 * t1 + em[1][1] * t0 * tau),
    ]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AsymptoticSample {
    pub y: f64,
    pub t: f64,
    pub lambda0: f64,
    pub m: [C64; 6],
    /// q̂ under the selected reading
    pub q_asy: f64,
    pub q_outer_only: f64,
    pub q_with_soliton_term: f64,
    /// q̂ from the full E(0) M_out(0) T(0)^{σ3} with the matched E1, carrying the
    /// t^{−1/2} radiation term
    pub q_with_e1: f64,
    /// x from the full first-order expansion at λ = 0
    pub x_asy: f64,
    /// x from y = x + ((m3 − m4)/(m5 − m6) − 1)/(2i), if the denominator is nonzero
    pub x_printed: Option<f64>,
    pub n_in_cone: usize,
    pub coeffs: LocalModelCoeffs,
    pub errors: ErrorTerms,
}

/// Outer model M_out: all poles, those in Δ− with the upper residue shape,
/// constants c′_n δ(λ_n)^{±2}.
pub fn outer_model(
    spec: &DiscreteSpectrum,
    ctx: &ConjugationContext,
    y: f64,
    t: f64,
) -> Result<crate::soliton::RhpSolution> {
    if spec.is_empty() {
        return Ok(crate::soliton::RhpSolution::identity());
    }
    let tri = &ctx.partition_minus;
    let cp = primed_constants(spec, tri);
    let mut consts = Vec::with_capacity(spec.len());
    let mut variants = Vec::with_capacity(spec.len());
    for (n, &l) in spec.poles.iter().enumerate() {
        let d = ctx.delta(l)?;
        if tri.contains(&n) {
            consts.push(cp[n] * d * d);
            variants.push(ResidueVariant::Upper);
        } else {
            consts.push(cp[n] / (d * d));
            variants.push(ResidueVariant::Lower);
        }
    }
    let sol = solve_reflectionless(&ReflectionlessData::with_variants(&spec.poles, &consts, &variants, y, t))?;
    sol.check_conditioning()?;
    Ok(sol)
}

/// σ_I for a cone: poles with v1/4 < |λ|² < v2/4, constants modified by
/// the growing poles outside I and by the η exponential.
pub fn sigma_interval(spec: &DiscreteSpectrum, cone: &Cone, ctx: &ConjugationContext) -> Result<DiscreteSpectrum> {
    let in_cone = select_interval(spec, cone)?;
    let modifying: Vec<usize> =
        (0..spec.len()).filter(|k| !in_cone.contains(k) && grows_on_ray(spec.poles[*k], cone.v2)).collect();
    let consts = crate::conjugation::modified_norming(spec, &in_cone, &modifying, Some(ctx))?;
    let poles = in_cone.iter().map(|&k| spec.poles[k]).collect();
    DiscreteSpectrum::new(poles, consts)
}

pub fn asymptotic_solution(
    spec: &DiscreteSpectrum,
    r: &Reflection,
    cone: &Cone,
    y: f64,
    t: f64,
    opt: &AsymptoticOptions,
) -> Result<AsymptoticSample> {
    if !(t >= opt.t_min) {
        return Err(DymError::InvalidInput(format!("t = {t} below the threshold {}", opt.t_min)));
    }
    if !cone.contains(y, t) {
        return Err(DymError::ConePointOutside { y, t });
    }
    let pp = stationary_point(y, t)?;
    let l0 = pp.lambda0;
    let ctx = ConjugationContext::new(r.clone(), spec, l0)?;
    let sol = outer_model(spec, &ctx, y, t)?;
    let mout0 = sol.m0();
    let mout_d = sol.m0_slope();
    let mp = sol.at(c(l0, 0.0));
    let mm = sol.at(c(-l0, 0.0));

    let coeffs = parabolic_coeffs(r.at(l0), ctx.nu, eta_tilde(&ctx, -1.0), eta_tilde(&ctx, 1.0), l0, t)?;
    let errors = error_terms(&mm, &mp, &coeffs)?;
    let (t0, t1) = (ctx.t_at_0, ctx.t1);
    let m = m_list(&mout0, t0, t1, &errors.e2, t);

    let q_outer_only = (m[0] * m[0] * m[1] * m[1]).re - 1.0;
    let sigma = sigma_interval(spec, cone, &ctx)?;
    let q_sol = if sigma.is_empty() { 0.0 } else { soliton_sample(&sigma, y, t)?.q_hat };
    let q_with_soliton_term = q_sol + q_outer_only;

    let den = m[4] - m[5];
    let x_printed = if den.norm() > 1e-14 {
        Some(y - ((((m[2] - m[3]) / den) - ONE) / (I * 2.0)).re)
    } else {
        None
    };

    // M ≈ E(λ) M_out(λ) T(λ)^{σ3} to first order at λ = 0
    let tau = c(1.0 / t.sqrt(), 0.0);
    let e0 = Mat2::IDENTITY + errors.e1_matched.scale(tau);
    let dt = Mat2::new(t0, ZERO, ZERO, ONE / t0);
    let ddt = Mat2::new(t0 * t1, ZERO, ZERO, -t1 / t0);
    let full0 = e0 * mout0 * dt;
    let full1 = errors.e2_matched.scale(tau) * mout0 * dt + e0 * (mout_d * dt + mout0 * ddt);
    let rec = reconstruct(&full0, &full1, y, t)?;

    let q_asy = match opt.reading {
        QReading::OuterOnly => q_outer_only,
        QReading::WithSolitonTerm => q_with_soliton_term,
    };
    Ok(AsymptoticSample {
        y,
        t,
        lambda0: l0,
        m,
        q_asy,
        q_outer_only,
        q_with_soliton_term,
        q_with_e1: rec.q_hat,
        x_asy: rec.x,
        x_printed,
        n_in_cone: sigma.len(),
        coeffs,
        errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn signature_examples() {
        assert_eq!(re_2i_theta(I, 1.0), 32.0);
        assert!((re_2i_theta_direct(I, 1.0) - 32.0).abs() < 1e-12);
        assert_eq!(re_2i_theta(c(1.0, 0.0), 1.0), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let l = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let a = re_2i_theta(l, 0.7);
            let b = re_2i_theta_direct(l, 0.7);
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn signature_locus_on_hyperbola() {
        let g = phase_signature(-12.0, 1.0, (-3.0, 3.0), (-3.0, 3.0), 100, 100).unwrap();
        assert!(!g.sign_changes().is_empty());
        assert_eq!(g.locus_mismatches(), 0);
        assert!(matches!(
            phase_signature(1.0, 1.0, (-1.0, 1.0), (-1.0, 1.0), 4, 4),
            Err(DymError::WrongRegime { .. })
        ));
    }

    #[test]
    fn beta21_modulus_identity() {
        for nu in [0.01, 0.1, 0.5, 1.0] {
            let r = c((1.0 - (-2.0 * PI * nu).exp()).sqrt(), 0.0) * (I * 0.3).exp();
            let b = beta21(r, nu).unwrap();
            assert!((b.norm_sqr() - nu).abs() < 1e-8, "{nu}: {}", b.norm_sqr());
        }
        assert_eq!(beta21(ZERO, 0.0).unwrap(), ZERO);
        assert!(matches!(beta21(ONE, -0.1), Err(DymError::GammaPole { .. })));
    }

    #[test]
    fn local_model_shapes() {
        let k = parabolic_coeffs(c(0.3, 0.1), 0.02, c(0.0, 0.05), c(0.0, -0.02), 0.8, 20.0).unwrap();
        assert_eq!(k.m1b.0[1][0], -I * k.beta21);
        assert_eq!(k.m1b.0[0][1], I * k.beta21.conj());
        assert_eq!(k.m1a, -k.m1b.conj());
        assert!((k.delta_a0.norm() - k.eta_tilde_minus.exp().norm()).abs() < 1e-14);
        let zero = parabolic_coeffs(ZERO, 0.0, ZERO, ZERO, 1.0, 10.0).unwrap();
        assert_eq!(zero.m1b, Mat2::ZERO);
        let e = error_terms(&Mat2::IDENTITY, &Mat2::IDENTITY, &zero).unwrap();
        assert_eq!(e.e1.max_abs() + e.e2.max_abs(), 0.0);
    }

    #[test]
    fn error_terms_identity_outer() {
        let k = parabolic_coeffs(c(0.3, 0.1), 0.02, ZERO, ZERO, 0.8, 20.0).unwrap();
        let e = error_terms(&Mat2::IDENTITY, &Mat2::IDENTITY, &k).unwrap();
        let want = (k.m1_at(1.0) - k.m1_at(-1.0)).scale(c(1.0 / (48.0 * 0.8f64.powi(3)).sqrt(), 0.0));
        assert!((e.e1 - want).max_abs() < 1e-15);
        assert_eq!(e.e1.0[0][0], ZERO);
        assert_eq!(e.e1.0[1][1], ZERO);
        assert!(matches!(error_terms(&Mat2::ZERO, &Mat2::IDENTITY, &k), Err(DymError::SingularOuter { .. })));
    }

    #[test]
    fn m_list_reduces_to_outer_reconstruction() {
        let a = Mat2::new(c(1.2, 0.1), c(-0.3, 0.2), c(0.1, -0.4), c(0.9, 0.05));
        let m = m_list(&a, ONE, ZERO, &Mat2::ZERO, 25.0);
        assert_eq!(m[2], ZERO);
        assert_eq!(m[5], ZERO);
        let u = (a.0[0][0] + a.0[1][0]) * (a.0[0][1] + a.0[1][1]);
        assert!((m[0] * m[0] * m[1] * m[1] - u * u).norm() < 1e-14);
    }

    #[test]
    fn eta_tilde_forms_agree() {
        let r = Reflection::from_fn(|s| c(0.3 * (-(s * s)).exp() * s * s, 0.1 * s * s));
        let ctx = ConjugationContext::new(r, &DiscreteSpectrum::empty(), 0.9).unwrap();
        for sg in [-1.0, 1.0] {
            let a = eta_tilde(&ctx, sg);
            let b = eta_tilde_stieltjes(&ctx, sg, 4001);
            assert!(a.re.abs() < 1e-15);
            assert!((a - b).norm() < 1e-6, "{a} {b}");
        }
    }

    #[test]
    fn radiation_free_reduction_selects_outer_only() {
        let spec = DiscreteSpectrum::new(vec![c(0.0, 0.15), c(0.0, 0.8)], vec![c(0.0, -0.3), c(0.0, -1.6)]).unwrap();
        let cone = Cone { y1: -1.0, y2: 1.0, v1: -2.0, v2: 4.0 };
        let r = Reflection::zero();
        for (y, t) in [(-5.0, 10.0), (-1.0, 12.0), (-9.5, 20.0)] {
            let s = asymptotic_solution(&spec, &r, &cone, y, t, &AsymptoticOptions::default()).unwrap();
            let exact = soliton_sample(&spec, y, t).unwrap();
            assert_eq!(s.n_in_cone, 2);
            assert!((s.q_outer_only - exact.q_hat).abs() < 1e-8, "{} {}", s.q_outer_only, exact.q_hat);
            assert!((s.q_with_e1 - exact.q_hat).abs() < 1e-8);
            assert!((s.x_asy - exact.x).abs() < 1e-8);
            assert!((s.q_with_soliton_term - 2.0 * exact.q_hat - 1.0 + 1.0).abs() < 1e-8);
        }
        let far = asymptotic_solution(&spec, &r, &cone, 50.0, 10.0, &AsymptoticOptions::default());
        assert!(matches!(far, Err(DymError::ConePointOutside { .. })));
    }
}
