//! Reflectionless Riemann-Hilbert problems, parametric reconstruction,
//! one-soliton formulas and cone reduction.

use crate::error::{DymError, Result};
use crate::linalg::{c, Lu, Mat2, C64, I, ONE, ZERO};
use crate::scattering::LaxPath;
use crate::spectrum::DiscreteSpectrum;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Residue shape at λ_n: `Lower` is K = [[0,0],[κ,0]], `Upper` is [[0,κ],[0,0]].
/// The conjugate point carries −σ2 conj(K) σ2, i.e. the transposed shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResidueVariant {
    Lower,
    Upper,
}

/// One pole of the reflectionless problem with κ stored as a logarithm.
#[derive(Clone, Copy, Debug)]
pub struct PoleDatum {
    pub lambda: C64,
    /// log κ_n at λ_n
    pub log_kappa: C64,
    /// log of the conjugate-point coefficient (conj κ_n for real y)
    pub log_kappa_conj: C64,
    pub variant: ResidueVariant,
}

#[derive(Clone, Debug, Default)]
pub struct ReflectionlessData {
    pub poles: Vec<PoleDatum>,
}

/// 2iθ·t = 2i(λy + 4λ³t), analytic in y.
#[inline]
pub fn phase_exponent(lambda: C64, y: C64, t: f64) -> C64 {
    I * 2.0 * (lambda * y + lambda * lambda * lambda * (4.0 * t))
}

impl ReflectionlessData {
    /// Plain problem with κ_n = c_n e^{2i(λ_n y + 4λ_n³ t)}; y may be complex,
    /// in which case the conjugate-point coefficient is continued analytically.
    pub fn from_spectrum(spec: &DiscreteSpectrum, y: C64, t: f64) -> Self {
        let poles = spec
            .poles
            .iter()
            .zip(&spec.norming)
            .map(|(&l, &cn)| PoleDatum {
                lambda: l,
                log_kappa: cn.ln() + phase_exponent(l, y, t),
                log_kappa_conj: cn.conj().ln() - I * 2.0 * (l.conj() * y + l.conj().powu(3) * (4.0 * t)),
                variant: ResidueVariant::Lower,
            })
            .collect();
        ReflectionlessData { poles }
    }

    /// Problem with per-pole variants. For `Upper` poles the constant is the
    /// already-inverted one (c_n⁻¹ a′_△(λ_n)⁻²) and the exponential is e^{−2itθ}.
    pub fn with_variants(poles: &[C64], consts: &[C64], variants: &[ResidueVariant], y: f64, t: f64) -> Self {
        let yc = c(y, 0.0);
        let poles = poles
            .iter()
            .zip(consts)
            .zip(variants)
            .map(|((&l, &k), &v)| {
                let e = phase_exponent(l, yc, t);
                let lk = match v {
                    ResidueVariant::Lower => k.ln() + e,
                    ResidueVariant::Upper => k.ln() - e,
                };
                PoleDatum { lambda: l, log_kappa: lk, log_kappa_conj: lk.conj(), variant: v }
            })
            .collect();
        ReflectionlessData { poles }
    }
}

/// M(λ) = I + Σ_j X_j e_{col_j}ᵀ / (λ − z_j).
#[derive(Clone, Debug)]
pub struct RhpSolution {
    pub points: Vec<C64>,
    pub cols: Vec<usize>,
    pub residues: Vec<[C64; 2]>,
    pub condition: f64,
}

pub const COND_LIMIT: f64 = 1e12;

impl RhpSolution {
    pub fn identity() -> Self {
        RhpSolution { points: vec![], cols: vec![], residues: vec![], condition: 1.0 }
    }

    pub fn at(&self, z: C64) -> Mat2 {
        let mut m = Mat2::IDENTITY;
        for ((p, &col), x) in self.points.iter().zip(&self.cols).zip(&self.residues) {
            let d = ONE / (z - p);
            m.0[0][col] += x[0] * d;
            m.0[1][col] += x[1] * d;
        }
        m
    }

    /// dM/dλ at z.
    pub fn derivative(&self, z: C64) -> Mat2 {
        let mut m = Mat2::ZERO;
        for ((p, &col), x) in self.points.iter().zip(&self.cols).zip(&self.residues) {
            let d = -ONE / ((z - p) * (z - p));
            m.0[0][col] += x[0] * d;
            m.0[1][col] += x[1] * d;
        }
        m
    }

    pub fn m0(&self) -> Mat2 {
        self.at(ZERO)
    }

    /// First-order coefficient M1 in M(λ) = M(0) + λ M1 + O(λ²), i.e. −Σ X_j/z_j².
    pub fn m0_slope(&self) -> Mat2 {
        self.derivative(ZERO)
    }

    pub fn check_conditioning(&self) -> Result<()> {
        if self.condition > COND_LIMIT {
            Err(DymError::IllConditioned { cond: self.condition })
        } else {
            Ok(())
        }
    }
}

/// Solve the residue conditions as a 2N × 2N linear system.
///
/// Each equation X_j = k_j M^{(1−col_j)}(z_j) is divided by k_j when |k_j| > 1,
/// so that only e^{−|log k|} ever appears and large exponents cannot overflow.
pub fn solve_reflectionless(data: &ReflectionlessData) -> Result<RhpSolution> {
    let n = 2 * data.poles.len();
    if n == 0 {
        return Ok(RhpSolution::identity());
    }
    let mut points = Vec::with_capacity(n);
    let mut cols = Vec::with_capacity(n);
    let mut logk = Vec::with_capacity(n);
    for p in &data.poles {
        let (ca, cb) = match p.variant {
            ResidueVariant::Lower => (0, 1),
            ResidueVariant::Upper => (1, 0),
        };
        points.push(p.lambda);
        cols.push(ca);
        logk.push(p.log_kappa);
        points.push(p.lambda.conj());
        cols.push(cb);
        logk.push(p.log_kappa_conj);
    }
    let mut g = vec![ZERO; n * n];
    let mut rhs = [vec![ZERO; n], vec![ZERO; n]];
    for j in 0..n {
        let other = 1 - cols[j];
        let big = logk[j].re > 0.0;
        // equation: s_j X_j − t_j Σ_{i: col_i = other} X_i/(z_j − z_i) = t_j e_other
        let (sj, tj) = if big { ((-logk[j]).exp(), ONE) } else { (ONE, logk[j].exp()) };
        g[j * n + j] += sj;
        for i in 0..n {
            if cols[i] == other {
                let d = points[j] - points[i];
                if d.norm() == 0.0 {
                    return Err(DymError::SingularSystem);
                }
                g[j * n + i] -= tj / d;
            }
        }
        rhs[other][j] = tj;
    }
    for (i, v) in g.iter().enumerate() {
        if !v.is_finite() {
            return Err(DymError::InvalidInput(format!("non-finite residue coefficient at entry {i}")));
        }
    }
    let lu = Lu::factor(n, &g).ok_or(DymError::SingularSystem)?;
    // row r of X_j is driven by the r-th unit vector
    let x0 = lu.solve(&rhs[0]);
    let x1 = lu.solve(&rhs[1]);
    let condition = lu.condition();
    if !condition.is_finite() {
        return Err(DymError::SingularSystem);
    }
    let residues = (0..n).map(|j| [x0[j], x1[j]]).collect();
    Ok(RhpSolution { points, cols, residues, condition })
}

/// Parametric solution sample (y, t) ↦ (x, q̂).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ParametricSample {
    pub y: f64,
    pub t: f64,
    pub x: f64,
    pub q_hat: f64,
    /// u = μ1μ2 at λ = 0
    pub mu1_mu2_at_0: f64,
    /// F = x − y
    pub f: f64,
    /// |μ1(0)/μ2(0) − 1|, zero for symmetric data
    pub mu_ratio_err: f64,
    /// imaginary parts discarded by the reconstruction
    pub imag_residual: f64,
    /// true near a cusp, where u or 1/u drops below 1e-6
    pub cusp: bool,
}

/// μ = (1,1)M at λ = 0; q̂ = (μ1μ2)² − 1; x from the slope of μ1/μ2 at 0.
pub fn reconstruct(m0: &Mat2, m1: &Mat2, y: f64, t: f64) -> Result<ParametricSample> {
    let mu1 = m0.0[0][0] + m0.0[1][0];
    let mu2 = m0.0[0][1] + m0.0[1][1];
    let d1 = m1.0[0][0] + m1.0[1][0];
    let d2 = m1.0[0][1] + m1.0[1][1];
    if mu2.norm() < 1e-14 || !mu2.is_finite() {
        return Err(DymError::DegenerateMu { y, t });
    }
    let u = mu1 * mu2;
    let slope = (d1 * mu2 - mu1 * d2) / (mu2 * mu2);
    let shift = slope / (I * 2.0);
    let x = y - shift.re;
    let q = u * u - ONE;
    let ur = u.re;
    Ok(ParametricSample {
        y,
        t,
        x,
        q_hat: q.re,
        mu1_mu2_at_0: ur,
        f: x - y,
        mu_ratio_err: (mu1 / mu2 - ONE).norm(),
        imag_residual: u.im.abs().max(shift.im.abs()),
        cusp: ur.abs() < 1e-6 || ur.abs() > 1e6,
    })
}

/// Solve the plain problem for a spectrum at real (y, t) and reconstruct.
pub fn soliton_sample(spec: &DiscreteSpectrum, y: f64, t: f64) -> Result<ParametricSample> {
    let sol = solve_reflectionless(&ReflectionlessData::from_spectrum(spec, c(y, 0.0), t))?;
    reconstruct(&sol.m0(), &sol.m0_slope(), y, t)
}

/// u(y) = μ1μ2(y, t, 0) at complex y.
pub fn u_complex(spec: &DiscreteSpectrum, y: C64, t: f64) -> Result<C64> {
    let sol = solve_reflectionless(&ReflectionlessData::from_spectrum(spec, y, t))?;
    let m = sol.m0();
    Ok((m.0[0][0] + m.0[1][0]) * (m.0[0][1] + m.0[1][1]))
}

/// Closed form of the one-pole solution with λ1 = iη, c1 = −i|c|:
/// u = coth²(η(y − y*)), x = y + (1 − tanh(η(y − y*)))/η,
/// y* = 4η²t + ln(|c|/(2η))/(2η).
pub fn one_soliton_closed_form(eta: f64, c_abs: f64, y: f64, t: f64) -> (f64, f64) {
    let ystar = 4.0 * eta * eta * t + (c_abs / (2.0 * eta)).ln() / (2.0 * eta);
    let th = (eta * (y - ystar)).tanh();
    let u = 1.0 / (th * th);
    (y + (1.0 - th) / eta, u * u - 1.0)
}

/// Result of the implicit one-soliton evaluation.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ImplicitSoliton {
    pub q: f64,
    pub eps_plus: f64,
    /// true at the cusp, where the tanh argument vanishes and q is infinite
    pub cusp: bool,
    pub iterations: usize,
}

/// q = tanh⁻⁴(S + ε₊) − 1 with S = κx − 4κ³t + κx0 and
/// ε₊ = (1 + tanh(S + ε₊))/κ, solved by safeguarded Newton.
pub fn one_soliton_implicit(kappa: f64, x0: f64, x: f64, t: f64) -> Result<ImplicitSoliton> {
    if kappa == 0.0 || !kappa.is_finite() {
        return Err(DymError::InvalidInput("kappa must be finite and nonzero".into()));
    }
    let s = kappa * x - 4.0 * kappa.powi(3) * t + kappa * x0;
    let f = |e: f64| e - (1.0 + (s + e).tanh()) / kappa;
    // the root lies between 0 and 2/κ
    let (mut lo, mut hi) = if kappa < 0.0 { (2.0 / kappa, 0.0) } else { (0.0, 2.0 / kappa) };
    let mut e = 0.5 * (lo + hi);
    let mut it = 0;
    let mut res;
    while it < 200 {
        it += 1;
        res = f(e);
        if res.abs() < 1e-15 {
            break;
        }
        if (f(lo) < 0.0) == (res < 0.0) {
            lo = e;
        } else {
            hi = e;
        }
        let sech2 = 1.0 / (s + e).cosh().powi(2);
        let dfe = 1.0 - sech2 / kappa;
        let newton = e - res / dfe;
        e = if dfe != 0.0 && newton > lo.min(hi) && newton < lo.max(hi) { newton } else { 0.5 * (lo + hi) };
        if (hi - lo).abs() < 1e-15 {
            break;
        }
    }
    res = f(e);
    if res.abs() > 1e-12 {
        return Err(DymError::NoConvergence { residual: res.abs() });
    }
    let th = (s + e).tanh();
    let cusp = th.abs() < 1e-12;
    Ok(ImplicitSoliton { q: th.powi(-4) - 1.0, eps_plus: e, cusp, iterations: it })
}

/// Cone y = y0 + v t, y0 ∈ [y1, y2], v ∈ [v1, v2].
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct Cone {
    pub y1: f64,
    pub y2: f64,
    pub v1: f64,
    pub v2: f64,
}

impl Cone {
    pub fn contains(&self, y: f64, t: f64) -> bool {
        // some v ∈ [v1, v2] puts y − v t in [y1, y2]
        let (a, b) = if t >= 0.0 { (y - self.v2 * t, y - self.v1 * t) } else { (y - self.v1 * t, y - self.v2 * t) };
        a <= self.y2 + 1e-12 && b >= self.y1 - 1e-12
    }

    /// Tensor grid of (y0, v) mapped to y at time t.
    pub fn slice(&self, t: f64, n_y0: usize, n_v: usize) -> Vec<f64> {
        let mut ys = Vec::with_capacity(n_y0 * n_v);
        for i in 0..n_y0 {
            let y0 = self.y1 + (self.y2 - self.y1) * i as f64 / (n_y0.max(2) - 1) as f64;
            for j in 0..n_v {
                let v = self.v1 + (self.v2 - self.v1) * j as f64 / (n_v.max(2) - 1) as f64;
                ys.push(y0 + v * t);
            }
        }
        ys
    }

    /// |λ|² window of the annulus I = {v1/4 < |λ|² < v2/4}.
    pub fn annulus(&self) -> (f64, f64) {
        (self.v1 / 4.0, self.v2 / 4.0)
    }
}

/// Radial distance from λ to the annulus I.
pub fn dist_to_annulus(lambda: C64, cone: &Cone) -> f64 {
    let r = lambda.norm();
    let r1 = (cone.v1.max(0.0) / 4.0).sqrt();
    let r2 = (cone.v2.max(0.0) / 4.0).sqrt();
    (r1 - r).max(r - r2).max(0.0)
}

/// ε(I) = min over poles outside I of Im λ_n (v1/|λ_n|²)(|λ_n| + √v2/2) dist(λ_n, I).
pub fn epsilon_of_cone(spec: &DiscreteSpectrum, cone: &Cone, in_cone: &[usize]) -> f64 {
    spec.poles
        .iter()
        .enumerate()
        .filter(|(k, _)| !in_cone.contains(k))
        .map(|(_, l)| {
            let m = l.norm();
            l.im * (cone.v1 / (m * m)) * (m + cone.v2.max(0.0).sqrt() / 2.0) * dist_to_annulus(*l, cone)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Poles with v1/4 < |λ|² < v2/4; BoundaryPole when within 1e-8 of an edge.
pub fn select_interval(spec: &DiscreteSpectrum, cone: &Cone) -> Result<Vec<usize>> {
    let (lo, hi) = cone.annulus();
    let mut out = Vec::new();
    for (k, l) in spec.poles.iter().enumerate() {
        let m2 = l.norm_sqr();
        if (m2 - lo).abs() < 1e-8 || (m2 - hi).abs() < 1e-8 {
            return Err(DymError::BoundaryPole { modulus_sq: m2 });
        }
        if m2 > lo && m2 < hi {
            out.push(k);
        }
    }
    Ok(out)
}

/// Cone reduction of a radiation-free spectrum.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConeReduction {
    /// indices of Λ(I)
    pub in_cone: Vec<usize>,
    pub n_in_cone: usize,
    pub epsilon: f64,
    /// poles whose factors modify the constants
    pub modifying: Vec<usize>,
    pub sigma: DiscreteSpectrum,
}

/// Growth rate sign of |e^{2itθ(λ)}| along the ray of velocity v: positive
/// means the exponential grows, i.e. Im λ((Im λ)² − 3(Re λ)²) > v Im λ/4.
pub fn grows_on_ray(lambda: C64, v: f64) -> bool {
    let (xi, eta) = (lambda.re, lambda.im);
    eta * eta - 3.0 * xi * xi > v / 4.0
}

/// Select Λ(I), compute ε(I), and build σ_I with
/// c_n(I) = c_n Π_{k ∈ K} ((λ_n − λ_k)/(λ_n − conj λ_k))², where K are the
/// poles outside I whose exponential grows throughout the cone.
pub fn cone_reduce(spec: &DiscreteSpectrum, cone: &Cone) -> Result<ConeReduction> {
    if !(cone.v1 > 0.0 && cone.v2 >= cone.v1) || !(cone.y2 >= cone.y1) {
        return Err(DymError::InvalidInput("cone needs 0 < v1 <= v2 and y1 <= y2".into()));
    }
    let in_cone = select_interval(spec, cone)?;
    let epsilon = epsilon_of_cone(spec, cone, &in_cone);
    let modifying: Vec<usize> = (0..spec.len())
        .filter(|k| !in_cone.contains(k) && grows_on_ray(spec.poles[*k], cone.v2))
        .collect();
    let mut poles = Vec::new();
    let mut norming = Vec::new();
    for &n in &in_cone {
        let ln = spec.poles[n];
        let mut cn = spec.norming[n];
        for &k in &modifying {
            let lk = spec.poles[k];
            let f = (ln - lk) / (ln - lk.conj());
            cn *= f * f;
        }
        poles.push(ln);
        norming.push(cn);
    }
    Ok(ConeReduction {
        n_in_cone: in_cone.len(),
        in_cone,
        epsilon,
        modifying,
        sigma: DiscreteSpectrum::new(poles, norming)?,
    })
}

/// The y-form Lax path on the line y = s + ih for a potential given as a
/// function of complex y: U(y) = (ln u)_y / 2.
#[derive(Clone)]
pub struct ContourProfile {
    pub shift: f64,
    pub s_left: f64,
    pub s_right: f64,
    potential: Arc<dyn Fn(C64) -> C64 + Send + Sync>,
}

impl ContourProfile {
    pub fn new(shift: f64, s_left: f64, s_right: f64, potential: Arc<dyn Fn(C64) -> C64 + Send + Sync>) -> Self {
        ContourProfile { shift, s_left, s_right, potential }
    }

    /// Reflectionless profile of a spectrum at time t, with u_y by a fourth-order
    /// central difference along the line.
    pub fn reflectionless(spec: &DiscreteSpectrum, t: f64, shift: f64, s_left: f64, s_right: f64) -> Self {
        let spec = spec.clone();
        let pot = move |y: C64| -> C64 {
            let h = 1e-3;
            let u = |z: C64| u_complex(&spec, z, t).unwrap_or(C64::new(f64::NAN, 0.0));
            let u0 = u(y);
            let du = (u(y - 2.0 * h) - u(y - h) * 8.0 + u(y + h) * 8.0 - u(y + 2.0 * h)) / (12.0 * h);
            du / (u0 * 2.0)
        };
        ContourProfile::new(shift, s_left, s_right, Arc::new(pot))
    }

    /// Profile built from the square root s of w = 1/u (s → ±1 at ±∞), U = −s_y/s.
    pub fn from_sqrt_w(shift: f64, s_left: f64, s_right: f64, s_and_ds: Arc<dyn Fn(C64) -> (C64, C64) + Send + Sync>) -> Self {
        let pot = move |y: C64| {
            let (s, ds) = s_and_ds(y);
            -ds / s
        };
        ContourProfile::new(shift, s_left, s_right, Arc::new(pot))
    }

    pub fn potential(&self, s: f64) -> C64 {
        (self.potential)(C64::new(s, self.shift))
    }
}

impl LaxPath for ContourProfile {
    fn span(&self) -> (f64, f64) {
        (self.s_left, self.s_right)
    }
    fn coeffs(&self, s: f64) -> (C64, C64) {
        (ONE, self.potential(s))
    }
    fn phase_right(&self) -> C64 {
        C64::new(self.s_right, self.shift)
    }
    fn max_step(&self) -> f64 {
        0.25
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_pole(eta: f64, cabs: f64) -> DiscreteSpectrum {
        DiscreteSpectrum::new(vec![c(0.0, eta)], vec![c(0.0, -cabs)]).unwrap()
    }

    #[test]
    fn empty_spectrum_is_identity() {
        let s = soliton_sample(&DiscreteSpectrum::empty(), 1.5, 0.3).unwrap();
        assert_eq!(s.q_hat, 0.0);
        assert_eq!(s.x, 1.5);
    }

    #[test]
    fn one_pole_matches_closed_form() {
        let (eta, cabs) = (0.8, 1.3);
        let spec = one_pole(eta, cabs);
        for &(y, t) in &[(-2.0, 0.0), (0.7, 0.0), (3.0, 0.5), (-1.0, 0.25)] {
            let s = soliton_sample(&spec, y, t).unwrap();
            let (x, q) = one_soliton_closed_form(eta, cabs, y, t);
            assert!((s.x - x).abs() < 1e-10, "x {} {}", s.x, x);
            assert!((s.q_hat - q).abs() < 1e-8 * (1.0 + q.abs()), "q {} {}", s.q_hat, q);
            assert!(s.mu_ratio_err < 1e-12 && s.imag_residual < 1e-10);
        }
    }

    #[test]
    fn sigma1_symmetry_and_unit_determinant() {
        let spec = DiscreteSpectrum::new(vec![c(0.0, 1.0)], vec![c(0.0, -1.0)]).unwrap();
        let sol = solve_reflectionless(&ReflectionlessData::from_spectrum(&spec, c(0.0, 0.0), 0.0)).unwrap();
        for &l in &[c(0.3, 0.0), c(-1.2, 0.0), ZERO] {
            let m = sol.at(l);
            assert!((m.det() - ONE).norm() < 1e-10);
            // σ1 M(−λ) σ1 = M(λ) on the real line
            let r = Mat2::SIGMA1 * sol.at(-l) * Mat2::SIGMA1;
            assert!((r - m).max_abs() < 1e-12);
        }
    }

    #[test]
    fn huge_exponents_do_not_overflow() {
        let spec = one_pole(1.0, 2.0);
        for &y in &[-400.0, 400.0] {
            let s = soliton_sample(&spec, y, 0.0).unwrap();
            assert!(s.q_hat.abs() < 1e-12, "{y}: {}", s.q_hat);
        }
    }

    #[test]
    fn implicit_root_for_unit_negative_kappa() {
        let r = one_soliton_implicit(-1.0, 0.0, 0.0, 0.0).unwrap();
        // independent bracketing root of e = −(1 + tanh e)
        assert!((r.eps_plus + 0.521_298_457_000_278_9).abs() < 1e-12, "{}", r.eps_plus);
        assert!((r.eps_plus + 1.0 + r.eps_plus.tanh()).abs() < 1e-13);
    }

    #[test]
    fn implicit_matches_rhp_for_unit_positive_kappa() {
        // pole i, c = −i|c|: y0* = ln(|c|/2)/2, and the implicit formula with κ = 1
        // coincides after x0 = −y0* − 2
        let cabs = 3.0;
        let spec = one_pole(1.0, cabs);
        let y0 = (cabs / 2.0).ln() / 2.0;
        for &(y, t) in &[(0.9, 0.0), (-1.5, 0.1), (2.0, 0.3)] {
            let s = soliton_sample(&spec, y, t).unwrap();
            let imp = one_soliton_implicit(1.0, -y0 - 2.0, s.x, t).unwrap();
            assert!((imp.q - s.q_hat).abs() < 1e-6 * (1.0 + s.q_hat.abs()), "{} {}", imp.q, s.q_hat);
        }
    }

    #[test]
    fn cone_selection_examples() {
        let spec = DiscreteSpectrum::new(vec![c(0.0, 1.0)], vec![c(0.0, -1.0)]).unwrap();
        let r = cone_reduce(&spec, &Cone { y1: -1.0, y2: 1.0, v1: 2.0, v2: 6.0 }).unwrap();
        assert_eq!(r.n_in_cone, 1);
        let r = cone_reduce(&spec, &Cone { y1: -1.0, y2: 1.0, v1: 8.0, v2: 12.0 }).unwrap();
        assert_eq!(r.n_in_cone, 0);
        assert!(r.epsilon > 0.0 && r.epsilon.is_finite());
        // Im λ (v1/|λ|²)(|λ| + √v2/2) dist = 1·8·(1 + √3)·(√2 − 1)
        let want = 8.0 * (1.0 + 3f64.sqrt()) * (2f64.sqrt() - 1.0);
        assert!((r.epsilon - want).abs() < 1e-12);
        assert!(matches!(
            cone_reduce(&spec, &Cone { y1: 0.0, y2: 1.0, v1: 4.0, v2: 6.0 }),
            Err(DymError::BoundaryPole { .. })
        ));
    }

    #[test]
    fn modifying_factor_example() {
        let spec = DiscreteSpectrum::new(vec![c(0.0, 1.0), c(0.0, 2.0)], vec![c(0.0, -1.0), c(0.0, -1.0)]).unwrap();
        let r = cone_reduce(&spec, &Cone { y1: 0.0, y2: 1.0, v1: 2.0, v2: 6.0 }).unwrap();
        assert_eq!(r.modifying, vec![1]);
        assert!((r.sigma.norming[0] - c(0.0, -1.0 / 9.0)).norm() < 1e-15);
    }
}
