//! Scalar conjugation factors: λ0, ν, η, δ, T and the modulated norming constants.

use crate::error::{DymError, Result};
use crate::linalg::{c, C64, I, ONE, ZERO};
use crate::quad::{graded_rule, integrate_complex, integrate_real};
use crate::scattering::ScatteringData;
use crate::spectrum::DiscreteSpectrum;
use crate::spline::CubicSpline;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct PhasePoint {
    pub y_over_t: f64,
    pub lambda0: f64,
}

/// λ0 = √(−y/(12t)); only y/t < 0 is accepted.
pub fn stationary_point(y: f64, t: f64) -> Result<PhasePoint> {
    if !(t > 0.0) {
        return Err(DymError::InvalidInput("t must be positive".into()));
    }
    let ratio = y / t;
    if !(ratio < 0.0) {
        return Err(DymError::WrongRegime { ratio });
    }
    Ok(PhasePoint { y_over_t: ratio, lambda0: (-ratio / 12.0).sqrt() })
}

/// θ(λ) = λ y/t + 4λ³.
pub fn theta(lambda: C64, y_over_t: f64) -> C64 {
    lambda * y_over_t + lambda * lambda * lambda * 4.0
}

/// Reflection coefficient on the real line: cubic splines of Re r, Im r, zero beyond the grid.
#[derive(Clone)]
pub enum Reflection {
    Samples { re: CubicSpline, im: CubicSpline },
    Function(Arc<dyn Fn(f64) -> C64 + Send + Sync>),
}

impl std::fmt::Debug for Reflection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Reflection::Samples { re, .. } => write!(f, "Reflection::Samples({} knots)", re.knots().len()),
            Reflection::Function(_) => write!(f, "Reflection::Function"),
        }
    }
}

impl Reflection {
    pub fn from_data(d: &ScatteringData) -> Self {
        let mut idx: Vec<usize> = (0..d.lambda.len()).collect();
        idx.sort_by(|&a, &b| d.lambda[a].partial_cmp(&d.lambda[b]).unwrap());
        let x: Vec<f64> = idx.iter().map(|&i| d.lambda[i]).collect();
        let re: Vec<f64> = idx.iter().map(|&i| d.r[i].re).collect();
        let im: Vec<f64> = idx.iter().map(|&i| d.r[i].im).collect();
        Reflection::Samples { re: CubicSpline::new(&x, &re), im: CubicSpline::new(&x, &im) }
    }

    pub fn from_fn(f: impl Fn(f64) -> C64 + Send + Sync + 'static) -> Self {
        Reflection::Function(Arc::new(f))
    }

    pub fn zero() -> Self {
        Reflection::from_fn(|_| ZERO)
    }

    pub fn at(&self, s: f64) -> C64 {
        match self {
            Reflection::Samples { re, im } => {
                let (a, b) = re.domain();
                if s < a || s > b {
                    ZERO
                } else {
                    c(re.eval(s), im.eval(s))
                }
            }
            Reflection::Function(f) => f(s),
        }
    }
}

/// ν and samples of η on a Chebyshev grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NuEta {
    pub lambda0: f64,
    pub nu: f64,
    pub nodes: Vec<f64>,
    pub eta: Vec<f64>,
}

fn eta_value(r: &Reflection, s: f64, log_den: f64) -> f64 {
    -((1.0 - r.at(s).norm_sqr()).ln() - log_den) / (2.0 * PI)
}

/// ν = −ln(1 − |r(λ0)|²)/(2π); η(s) = −ln((1 − |r(s)|²)/(1 − |r(λ0)|²))/(2π).
pub fn nu_eta(r: &Reflection, lambda0: f64, n_nodes: usize) -> Result<NuEta> {
    if !(lambda0 > 0.0) {
        return Err(DymError::InvalidInput("lambda0 must be positive".into()));
    }
    let r0 = r.at(lambda0).norm_sqr();
    if r0 >= 1.0 {
        return Err(DymError::ReflectionAtUnit { at: lambda0 });
    }
    let log_den = (1.0 - r0).ln();
    let n = n_nodes.max(2);
    let nodes: Vec<f64> = (0..n).map(|k| -lambda0 * (PI * k as f64 / (n - 1) as f64).cos()).collect();
    let mut eta = Vec::with_capacity(n);
    for &s in &nodes {
        if r.at(s).norm_sqr() >= 1.0 {
            return Err(DymError::ReflectionAtUnit { at: s });
        }
        eta.push(eta_value(r, s, log_den));
    }
    Ok(NuEta { lambda0, nu: -log_den / (2.0 * PI), nodes, eta })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

/// Everything needed to evaluate δ and T at a given λ0.
#[derive(Clone, Debug)]
pub struct ConjugationContext {
    pub lambda0: f64,
    pub nu: f64,
    r: Reflection,
    log_den: f64,
    base_rule: Vec<(f64, f64)>,
    base_eta: Vec<f64>,
    /// Δ− = {n : |λ_n| < λ0} and its complement
    pub partition_minus: Vec<usize>,
    pub partition_plus: Vec<usize>,
    poles_minus: Vec<C64>,
    pub t_at_0: C64,
    /// T1 from the convergent small-λ expansion
    pub t1: C64,
    /// T1 as printed, 2Σ Im λ_n/λ_n − ∫η/s², the integral as a Hadamard finite part
    pub t1_as_printed: C64,
    pub t0_plus: C64,
    pub t0_minus: C64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ConjugationScalars {
    pub lambda0: f64,
    pub nu: f64,
    pub t0_plus: C64,
    pub t0_minus: C64,
    pub t1: C64,
    pub t1_as_printed: C64,
    pub t_at_0: C64,
}

impl ConjugationContext {
    pub fn new(r: Reflection, spec: &DiscreteSpectrum, lambda0: f64) -> Result<Self> {
        let ne = nu_eta(&r, lambda0, 33)?;
        let mut partition_minus = Vec::new();
        let mut partition_plus = Vec::new();
        for (k, p) in spec.poles.iter().enumerate() {
            let m = p.norm();
            if (m - lambda0).abs() < 1e-8 {
                return Err(DymError::PartitionBoundary { modulus: m });
            }
            if m < lambda0 {
                partition_minus.push(k);
            } else {
                partition_plus.push(k);
            }
        }
        let poles_minus: Vec<C64> = partition_minus.iter().map(|&k| spec.poles[k]).collect();
        let base_rule = graded_rule(-lambda0, lambda0, &[0.0], 30);
        let log_den = (1.0 - r.at(lambda0).norm_sqr()).ln();
        let base_eta = base_rule.iter().map(|&(s, _)| eta_value(&r, s, log_den)).collect();
        let mut ctx = ConjugationContext {
            lambda0,
            nu: ne.nu,
            r,
            log_den,
            base_rule,
            base_eta,
            partition_minus,
            partition_plus,
            poles_minus,
            t_at_0: ONE,
            t1: ZERO,
            t1_as_printed: ZERO,
            t0_plus: ONE,
            t0_minus: ONE,
        };
        ctx.t_at_0 = ctx.t_boundary(0.0, Side::Plus)?;
        ctx.t1 = ctx.compute_t1();
        ctx.t1_as_printed = ctx.compute_t1_as_printed();
        ctx.t0_plus = ctx.t0(1.0);
        ctx.t0_minus = ctx.t0(-1.0);
        Ok(ctx)
    }

    pub fn scalars(&self) -> ConjugationScalars {
        ConjugationScalars {
            lambda0: self.lambda0,
            nu: self.nu,
            t0_plus: self.t0_plus,
            t0_minus: self.t0_minus,
            t1: self.t1,
            t1_as_printed: self.t1_as_printed,
            t_at_0: self.t_at_0,
        }
    }

    pub fn reflection(&self) -> &Reflection {
        &self.r
    }

    pub fn eta(&self, s: f64) -> f64 {
        if s.abs() > self.lambda0 {
            return 0.0;
        }
        eta_value(&self.r, s, self.log_den)
    }

    fn focused_rule(&self, focus: f64) -> Vec<(f64, f64)> {
        graded_rule(-self.lambda0, self.lambda0, &[focus], 48)
    }

    /// ∫_{−λ0}^{λ0} η(s)/(s − λ) ds for λ off the interval.
    pub fn cauchy(&self, lambda: C64) -> C64 {
        let l0 = self.lambda0;
        let star = lambda.re.clamp(-l0, l0);
        let dist = (lambda - c(star, 0.0)).norm();
        if dist > 0.5 * l0 {
            return self
                .base_rule
                .iter()
                .zip(&self.base_eta)
                .fold(ZERO, |acc, (&(s, w), &e)| acc + e * w / (s - lambda));
        }
        let es = self.eta(star);
        let rule = self.focused_rule(star);
        let body = integrate_complex(&rule, |s| (self.eta(s) - es) / (s - lambda));
        body + es * ((c(l0, 0.0) - lambda) / (c(-l0, 0.0) - lambda)).ln()
    }

    /// Principal value ∫ η(s)/(s − s0) ds, s0 inside the interval.
    pub fn cauchy_pv(&self, s0: f64) -> f64 {
        let l0 = self.lambda0;
        let e0 = self.eta(s0);
        let rule = self.focused_rule(s0);
        let body = integrate_real(&rule, |s| (self.eta(s) - e0) / (s - s0));
        body + e0 * ((l0 - s0) / (l0 + s0)).ln()
    }

    fn on_cut(&self, lambda: C64) -> bool {
        lambda.im == 0.0 && lambda.re.abs() <= self.lambda0
    }

    /// δ(λ) = ((λ − λ0)/(λ + λ0))^{iν} exp(i ∫ η(s)/(s − λ) ds), principal branch.
    pub fn delta(&self, lambda: C64) -> Result<C64> {
        if self.on_cut(lambda) {
            return Err(DymError::OnBranchCut { at: format!("{lambda}") });
        }
        let l0 = c(self.lambda0, 0.0);
        let lg = ((lambda - l0) / (lambda + l0)).ln();
        Ok((I * self.nu * lg + I * self.cauchy(lambda)).exp())
    }

    /// One-sided boundary value of δ on (−λ0, λ0) by the Plemelj formula.
    pub fn delta_boundary(&self, s0: f64, side: Side) -> Result<C64> {
        let l0 = self.lambda0;
        if !(s0.abs() < l0) {
            return self.delta(c(s0, 0.0));
        }
        let sg = if side == Side::Plus { 1.0 } else { -1.0 };
        let lg = c(((l0 - s0) / (l0 + s0)).ln(), sg * PI);
        let cv = c(self.cauchy_pv(s0), sg * PI * self.eta(s0));
        Ok((I * self.nu * lg + I * cv).exp())
    }

    fn blaschke_minus(&self, lambda: C64) -> Result<C64> {
        let mut b = ONE;
        for p in &self.poles_minus {
            if (lambda - p).norm() < 1e-14 {
                return Err(DymError::PoleHit { at: format!("{p}") });
            }
            b *= (lambda - p.conj()) / (lambda - p);
        }
        Ok(b)
    }

    /// T(λ) = Π_{Δ−} (λ − conj λ_n)/(λ − λ_n) · δ(λ).
    pub fn t(&self, lambda: C64) -> Result<C64> {
        Ok(self.blaschke_minus(lambda)? * self.delta(lambda)?)
    }

    pub fn t_boundary(&self, s0: f64, side: Side) -> Result<C64> {
        Ok(self.blaschke_minus(c(s0, 0.0))? * self.delta_boundary(s0, side)?)
    }

    /// T′(0)/T(0) = Σ_{Δ−}(1/λ_n − 1/conj λ_n) − 2i(ν + η(0))/λ0 + i ∫ (η(s) − η(0))/s² ds.
    fn compute_t1(&self) -> C64 {
        let l0 = self.lambda0;
        let e0 = self.eta(0.0);
        let rule = graded_rule(-l0, l0, &[0.0], 48);
        let fin = integrate_real(&rule, |s| (self.eta(s) - e0) / (s * s));
        let bl = self.poles_minus.iter().fold(ZERO, |acc, p| acc + ONE / p - ONE / p.conj());
        bl - I * 2.0 * (self.nu + e0) / l0 + I * fin
    }

    fn compute_t1_as_printed(&self) -> C64 {
        let l0 = self.lambda0;
        let e0 = self.eta(0.0);
        let rule = graded_rule(-l0, l0, &[0.0], 48);
        // finite part: ∫(η − η(0))/s² + η(0)·(−2/λ0)
        let fp = integrate_real(&rule, |s| (self.eta(s) - e0) / (s * s)) - 2.0 * e0 / l0;
        let bl = self.poles_minus.iter().fold(ZERO, |acc, p| acc + p.im * 2.0 / p);
        bl - fp
    }

    /// β±(λ) = −η(±λ0) ln(λ ∓ λ0 + 1) + ∫ (η(s) − χ±(s) η(±λ0))/(s − λ) ds,
    /// χ+ the indicator of (λ0 − 1, λ0) and χ− of (−λ0, −λ0 + 1).
    pub fn beta(&self, sign: f64, lambda: C64) -> C64 {
        let l0 = self.lambda0;
        let e_end = self.eta(sign * l0);
        let chi = |s: f64| -> f64 {
            let inside = if sign > 0.0 { s > l0 - 1.0 && s < l0 } else { s > -l0 && s < -l0 + 1.0 };
            if inside {
                1.0
            } else {
                0.0
            }
        };
        let mut focus = vec![sign * l0];
        if sign > 0.0 && l0 - 1.0 > -l0 {
            focus.push(l0 - 1.0);
        }
        if sign < 0.0 && -l0 + 1.0 < l0 {
            focus.push(-l0 + 1.0);
        }
        let rule = graded_rule(-l0, l0, &focus, 48);
        let integral = integrate_complex(&rule, |s| c(self.eta(s) - chi(s) * e_end, 0.0) / (s - lambda));
        -(lambda - sign * l0 + 1.0).ln() * e_end + integral
    }

    /// T0(±λ0) = Π_{Δ−}(±λ0 − conj λ_n)/(±λ0 − λ_n) e^{iβ±(±λ0)}.
    fn t0(&self, sign: f64) -> C64 {
        let l = c(sign * self.lambda0, 0.0);
        let b = self.poles_minus.iter().fold(ONE, |acc, p| acc * (l - p.conj()) / (l - p));
        b * (I * self.beta(sign, l)).exp()
    }

    /// Endpoint model T0(±λ0)((λ − λ0)/(λ + λ0))^{iν}, the local form of T near ±λ0.
    pub fn endpoint_model(&self, sign: f64, lambda: C64) -> C64 {
        let l0 = c(self.lambda0, 0.0);
        let t0 = if sign > 0.0 { self.t0_plus } else { self.t0_minus };
        t0 * (I * self.nu * ((lambda - l0) / (lambda + l0)).ln()).exp()
    }

    /// Endpoint model as printed: T0(±λ0)(λ ∓ λ0)^{iη(±λ0)}.
    pub fn endpoint_model_as_printed(&self, sign: f64, lambda: C64) -> C64 {
        let t0 = if sign > 0.0 { self.t0_plus } else { self.t0_minus };
        t0 * (I * self.eta(sign * self.lambda0) * (lambda - sign * self.lambda0).ln()).exp()
    }

    /// Large-λ coefficient: T ≈ 1 + (i/λ)[2Σ Im λ_n − ∫η − 2νλ0].
    pub fn tail_coefficient(&self) -> f64 {
        let s_im: f64 = self.poles_minus.iter().map(|p| p.im).sum();
        let int_eta: f64 = self.base_rule.iter().zip(&self.base_eta).map(|(&(_, w), &e)| w * e).sum();
        2.0 * s_im - int_eta - 2.0 * self.nu * self.lambda0
    }

    /// (−1/(πi)) ∫ η(s)/(s − λ) ds as an exponent.
    pub fn norming_exponent(&self, lambda: C64) -> Result<C64> {
        if self.on_cut(lambda) {
            return Err(DymError::PoleOnInterval { at: format!("{lambda}") });
        }
        Ok(self.cauchy(lambda) * (I / PI))
    }
}

/// a_△(λ) = Π_{k ∈ △}(λ − λ_k)/(λ − conj λ_k).
pub fn a_partial(poles: &[C64], set: &[usize], lambda: C64) -> C64 {
    set.iter().fold(ONE, |acc, &k| acc * (lambda - poles[k]) / (lambda - poles[k].conj()))
}

/// a′_△ at one of its own zeros λ_n, n ∈ △.
pub fn a_partial_prime_at_zero(poles: &[C64], set: &[usize], n: usize) -> C64 {
    let ln = poles[n];
    let mut v = ONE / (ln - ln.conj());
    for &k in set {
        if k != n {
            v *= (ln - poles[k]) / (ln - poles[k].conj());
        }
    }
    v
}

/// c_n(I) = c_n Π_{k ∈ K} ((λ_n − λ_k)/(λ_n − conj λ_k))² exp[−(1/πi)∫ η/(s − λ_n)]
/// for every n in `targets`; the exponential is omitted when `ctx` is `None`.
pub fn modified_norming(
    spec: &DiscreteSpectrum,
    targets: &[usize],
    modifying: &[usize],
    ctx: Option<&ConjugationContext>,
) -> Result<Vec<C64>> {
    let mut out = Vec::with_capacity(targets.len());
    for &n in targets {
        let ln = spec.poles[n];
        let mut cn = spec.norming[n];
        for &k in modifying {
            let f = (ln - spec.poles[k]) / (ln - spec.poles[k].conj());
            cn *= f * f;
        }
        if let Some(ctx) = ctx {
            cn *= ctx.norming_exponent(ln)?.exp();
        }
        out.push(cn);
    }
    Ok(out)
}

/// c′_n = c_n⁻¹ a′_△(λ_n)⁻² for n ∈ △ and c_n a_△(λ_n)² otherwise.
pub fn primed_constants(spec: &DiscreteSpectrum, triangle: &[usize]) -> Vec<C64> {
    (0..spec.len())
        .map(|n| {
            if triangle.contains(&n) {
                let ap = a_partial_prime_at_zero(&spec.poles, triangle, n);
                ONE / (spec.norming[n] * ap * ap)
            } else {
                let a = a_partial(&spec.poles, triangle, spec.poles[n]);
                spec.norming[n] * a * a
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx_const(rabs: f64, l0: f64, spec: &DiscreteSpectrum) -> ConjugationContext {
        ConjugationContext::new(Reflection::from_fn(move |_| c(rabs, 0.0)), spec, l0).unwrap()
    }

    #[test]
    fn stationary_point_examples() {
        assert_eq!(stationary_point(-12.0, 1.0).unwrap().lambda0, 1.0);
        assert_eq!(stationary_point(-3.0, 1.0).unwrap().lambda0, 0.5);
        assert_eq!(stationary_point(-12.0, 4.0).unwrap().lambda0, 0.5);
        assert!(matches!(stationary_point(1.0, 1.0), Err(DymError::WrongRegime { .. })));
        // θ′(±λ0) = 0
        let p = stationary_point(-7.0, 2.0).unwrap();
        let d = p.y_over_t + 12.0 * p.lambda0 * p.lambda0;
        assert!(d.abs() < 1e-14);
    }

    #[test]
    fn nu_examples() {
        let z = nu_eta(&Reflection::zero(), 1.0, 9).unwrap();
        assert_eq!(z.nu, 0.0);
        assert!(z.eta.iter().all(|&e| e == 0.0));
        let r1 = (1.0 - (-2.0 * PI).exp()).sqrt();
        let n = nu_eta(&Reflection::from_fn(move |_| c(r1, 0.0)), 0.7, 9).unwrap();
        assert!((n.nu - 1.0).abs() < 1e-12);
        let h = nu_eta(&Reflection::from_fn(|_| c(0.5, 0.0)), 1.0, 9).unwrap();
        assert!((h.nu - 0.045_786_023_869_621_7).abs() < 1e-12, "{}", h.nu);
        assert!(h.eta.iter().all(|e| e.abs() < 1e-15));
        assert!(matches!(
            nu_eta(&Reflection::from_fn(|_| c(1.0, 0.0)), 1.0, 9),
            Err(DymError::ReflectionAtUnit { .. })
        ));
    }

    #[test]
    fn delta_trivial_and_jump() {
        let e = DiscreteSpectrum::empty();
        let ctx = ctx_const(0.0, 1.0, &e);
        assert!((ctx.delta(c(0.3, 0.7)).unwrap() - ONE).norm() < 1e-15);
        let ctx = ctx_const(0.5, 1.0, &e);
        let p = ctx.delta_boundary(0.0, Side::Plus).unwrap();
        let m = ctx.delta_boundary(0.0, Side::Minus).unwrap();
        assert!((p / m - c(0.75, 0.0)).norm() < 1e-12);
        // offset oracle
        let po = ctx.delta(c(0.0, 1e-9)).unwrap();
        let mo = ctx.delta(c(0.0, -1e-9)).unwrap();
        assert!((po / mo - c(0.75, 0.0)).norm() < 1e-6);
        assert!(matches!(ctx.delta(c(0.2, 0.0)), Err(DymError::OnBranchCut { .. })));
    }

    #[test]
    fn single_pole_blaschke_at_zero() {
        let spec = DiscreteSpectrum::new(vec![c(0.0, 1.0)], vec![c(0.0, -1.0)]).unwrap();
        let ctx = ctx_const(0.0, 2.0, &spec);
        assert_eq!(ctx.partition_minus, vec![0]);
        assert!((ctx.t_at_0 + ONE).norm() < 1e-14);
        let near = ctx.t(c(1e-8, 1e-8)).unwrap();
        assert!((near + ONE).norm() < 1e-7);
        assert!(matches!(ctx.t(c(0.0, 1.0)), Err(DymError::PoleHit { .. })));
        assert!(matches!(
            ConjugationContext::new(Reflection::zero(), &spec, 1.0 + 1e-10),
            Err(DymError::PartitionBoundary { .. })
        ));
    }

    #[test]
    fn modified_norming_examples() {
        let spec = DiscreteSpectrum::new(vec![c(0.0, 1.0), c(0.0, 2.0)], vec![ONE, ONE]).unwrap();
        let v = modified_norming(&spec, &[0], &[1], None).unwrap();
        assert!((v[0] - c(1.0 / 9.0, 0.0)).norm() < 1e-15);
        // constant η = 0.1 on [−1, 1]: build r with that η by |r(s)|² = 1 − (1 − |r(λ0)|²)e^{−0.2π}
        let r0 = 0.3f64;
        let rs = (1.0 - (1.0 - r0 * r0) * (-0.2 * PI).exp()).sqrt();
        let refl = Reflection::from_fn(move |s| if (s.abs() - 1.0).abs() < 1e-12 { c(r0, 0.0) } else { c(rs, 0.0) });
        let empty = DiscreteSpectrum::empty();
        let ctx = ConjugationContext::new(refl, &empty, 1.0).unwrap();
        let spec1 = DiscreteSpectrum::new(vec![c(0.0, 1.0)], vec![ONE]).unwrap();
        let v = modified_norming(&spec1, &[0], &[], Some(&ctx)).unwrap();
        // oracle: exp[−(0.1/(πi)) log((1 − i)/(−1 − i))]
        let lam = c(0.0, 1.0);
        let want = (-(c(0.1, 0.0) / (I * PI)) * ((c(1.0, 0.0) - lam) / (c(-1.0, 0.0) - lam)).ln()).exp();
        assert!((v[0] - want).norm() < 1e-8, "{} {}", v[0], want);
    }

    #[test]
    fn primed_constants_identity_without_triangle() {
        let spec = DiscreteSpectrum::new(vec![c(0.2, 1.0), c(-0.2, 1.0)], vec![c(0.5, -1.0), c(-0.5, -1.0)]).unwrap();
        let p = primed_constants(&spec, &[]);
        assert_eq!(p, spec.norming);
    }
}
