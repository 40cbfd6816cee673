//! Discrete spectrum: zeros of a(λ) in the upper half-plane and norming constants.

use crate::error::{DymError, Result};
use crate::linalg::C64;
use crate::ode::OdeOptions;
use crate::quad::circle_integral;
use crate::scattering::{a_of, b_at_zero, LaxPath};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Poles λ_n (Im λ_n > 0) with norming constants c_n = b(λ_n)/a′(λ_n).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiscreteSpectrum {
    pub poles: Vec<C64>,
    pub norming: Vec<C64>,
}

impl DiscreteSpectrum {
    pub fn new(poles: Vec<C64>, norming: Vec<C64>) -> Result<Self> {
        if poles.len() != norming.len() {
            return Err(DymError::InvalidInput("poles and norming constants differ in length".into()));
        }
        for (k, p) in poles.iter().enumerate() {
            if !(p.im > 0.0) || !p.is_finite() {
                return Err(DymError::InvalidInput(format!("pole {p} is not in the upper half-plane")));
            }
            if !norming[k].is_finite() || norming[k].norm() == 0.0 {
                return Err(DymError::InvalidInput(format!("norming constant for pole {p} must be finite and nonzero")));
            }
            for q in &poles[..k] {
                if (p - q).norm() < 1e-12 {
                    return Err(DymError::InvalidInput(format!("repeated pole {p}")));
                }
            }
        }
        Ok(DiscreteSpectrum { poles, norming })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    /// Minimum distance between distinct points of {λ_n} ∪ {conj λ_n}; this is 2d.
    pub fn min_separation(&self) -> f64 {
        let mut pts: Vec<C64> = self.poles.clone();
        pts.extend(self.poles.iter().map(|p| p.conj()));
        let mut m = f64::INFINITY;
        for i in 0..pts.len() {
            for j in 0..i {
                m = m.min((pts[i] - pts[j]).norm());
            }
        }
        m
    }

    /// The trace-formula value a(λ) = Π (λ − λ_n)/(λ − conj λ_n).
    pub fn blaschke(&self, lambda: C64) -> C64 {
        self.poles.iter().fold(C64::new(1.0, 0.0), |acc, p| acc * (lambda - p) / (lambda - p.conj()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl SearchBox {
    fn corners(&self) -> [C64; 4] {
        [
            C64::new(self.re_min, self.im_min),
            C64::new(self.re_max, self.im_min),
            C64::new(self.re_max, self.im_max),
            C64::new(self.re_min, self.im_max),
        ]
    }
    fn centre(&self) -> C64 {
        C64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }
    fn contains(&self, z: C64, slack: f64) -> bool {
        z.re >= self.re_min - slack && z.re <= self.re_max + slack && z.im >= self.im_min - slack && z.im <= self.im_max + slack
    }
    fn split(&self) -> [SearchBox; 2] {
        if self.re_max - self.re_min >= self.im_max - self.im_min {
            let m = 0.5 * (self.re_min + self.re_max);
            [SearchBox { re_max: m, ..*self }, SearchBox { re_min: m, ..*self }]
        } else {
            let m = 0.5 * (self.im_min + self.im_max);
            [SearchBox { im_max: m, ..*self }, SearchBox { im_min: m, ..*self }]
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub rtol: f64,
    pub atol: f64,
    /// |a| on the contour below this raises ZeroOnBoundary
    pub boundary_tol: f64,
    /// |a′(λ_n)| below this raises MultipleZero
    pub simple_tol: f64,
    pub newton_tol: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions { rtol: 1e-10, atol: 1e-13, boundary_tol: 1e-4, simple_tol: 1e-8, newton_tol: 1e-12 }
    }
}

/// Extra numbers produced while locating the spectrum.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SpectrumDiagnostics {
    pub winding: i64,
    pub evaluations: usize,
    /// a′(λ_n) by central difference
    pub a_prime_fd: Vec<C64>,
    /// a′(λ_n) by the Cauchy integral on a small circle
    pub a_prime_contour: Vec<C64>,
    /// |a(λ_n)| after Newton
    pub residual: Vec<f64>,
}

struct Evaluator<'a, P: LaxPath + ?Sized> {
    path: &'a P,
    ode: OdeOptions,
    count: std::cell::Cell<usize>,
}

impl<P: LaxPath + ?Sized> Evaluator<'_, P> {
    fn a(&self, z: C64) -> Result<C64> {
        self.count.set(self.count.get() + 1);
        a_of(self.path, z, &self.ode)
    }
    fn a_prime(&self, z: C64) -> Result<C64> {
        let h = 1e-5 * (1.0 + z.norm());
        Ok((self.a(z + h)? - self.a(z - h)?) / (2.0 * h))
    }
}

/// Winding number of a along the boundary, with adaptive sampling so that
/// consecutive arguments differ by less than π/8.
fn winding<P: LaxPath + ?Sized>(ev: &Evaluator<P>, b: &SearchBox, boundary_tol: f64) -> Result<i64> {
    let cs = b.corners();
    let mut total = 0.0;
    for k in 0..4 {
        let (z0, z1) = (cs[k], cs[(k + 1) % 4]);
        let n0 = 12;
        let mut pts: Vec<(f64, C64)> = Vec::new();
        for j in 0..=n0 {
            let s = j as f64 / n0 as f64;
            pts.push((s, ev.a(z0 + (z1 - z0) * s)?));
        }
        let mut i = 0;
        while i + 1 < pts.len() {
            let (s0, a0) = pts[i];
            let (s1, a1) = pts[i + 1];
            if a0.norm() < boundary_tol {
                return Err(DymError::ZeroOnBoundary { dist: a0.norm() });
            }
            let d = (a1 / a0).arg();
            if d.abs() > PI / 8.0 && s1 - s0 > 1e-9 {
                let sm = 0.5 * (s0 + s1);
                let am = ev.a(z0 + (z1 - z0) * sm)?;
                pts.insert(i + 1, (sm, am));
                continue;
            }
            if s1 - s0 <= 1e-9 && d.abs() > PI / 2.0 {
                return Err(DymError::ZeroOnBoundary { dist: a0.norm().min(a1.norm()) });
            }
            total += d;
            i += 1;
        }
    }
    let w = total / (2.0 * PI);
    let n = w.round();
    if (w - n).abs() > 0.05 {
        return Err(DymError::ZeroOnBoundary { dist: f64::NAN });
    }
    Ok(n as i64)
}

fn isolate<P: LaxPath + ?Sized>(
    ev: &Evaluator<P>,
    b: SearchBox,
    count: i64,
    opt: &SpectrumOptions,
    depth: usize,
    out: &mut Vec<(SearchBox, C64)>,
) -> Result<()> {
    if count <= 0 {
        return Ok(());
    }
    if count == 1 {
        let z = newton(ev, b, opt)?;
        out.push((b, z));
        return Ok(());
    }
    if depth > 30 {
        return Err(DymError::MultipleZero { near: format!("{}", b.centre()) });
    }
    let [b1, b2] = b.split();
    let mut k1 = winding(ev, &b1, opt.boundary_tol);
    if k1.is_err() {
        // nudge the split line off a zero
        let nudged = SearchBox {
            re_max: if b1.re_max < b.re_max { b1.re_max + 1e-3 * (b.re_max - b.re_min) } else { b1.re_max },
            im_max: if b1.im_max < b.im_max { b1.im_max + 1e-3 * (b.im_max - b.im_min) } else { b1.im_max },
            ..b1
        };
        k1 = winding(ev, &nudged, opt.boundary_tol);
        let k = k1?;
        let rest = SearchBox {
            re_min: if nudged.re_max < b.re_max { nudged.re_max } else { b.re_min },
            im_min: if nudged.im_max < b.im_max { nudged.im_max } else { b.im_min },
            ..b
        };
        isolate(ev, nudged, k, opt, depth + 1, out)?;
        return isolate(ev, rest, count - k, opt, depth + 1, out);
    }
    let k = k1?;
    isolate(ev, b1, k, opt, depth + 1, out)?;
    isolate(ev, b2, count - k, opt, depth + 1, out)
}

fn newton<P: LaxPath + ?Sized>(ev: &Evaluator<P>, b: SearchBox, opt: &SpectrumOptions) -> Result<C64> {
    let mut z = b.centre();
    let size = (b.re_max - b.re_min).max(b.im_max - b.im_min);
    for _ in 0..60 {
        let a = ev.a(z)?;
        let ap = ev.a_prime(z)?;
        if ap.norm() < opt.simple_tol {
            return Err(DymError::MultipleZero { near: format!("{z}") });
        }
        let mut step = a / ap;
        // damp steps that would leave the box
        let mut tries = 0;
        while !b.contains(z - step, 0.25 * size) && tries < 30 {
            step *= 0.5;
            tries += 1;
        }
        z -= step;
        if step.norm() < opt.newton_tol * (1.0 + z.norm()) {
            return Ok(z);
        }
    }
    let a = ev.a(z)?;
    if a.norm() < 1e-8 {
        Ok(z)
    } else {
        Err(DymError::MultipleZero { near: format!("{z}") })
    }
}

/// Count zeros of a in the box by the argument principle, isolate each by
/// bisection of the box, refine by Newton, and compute c_n.
pub fn locate_discrete_spectrum<P: LaxPath + ?Sized>(
    path: &P,
    search: &SearchBox,
    opt: &SpectrumOptions,
) -> Result<(DiscreteSpectrum, SpectrumDiagnostics)> {
    if !(search.im_min > 0.0 && search.im_max > search.im_min && search.re_max > search.re_min) {
        return Err(DymError::InvalidInput("search box must be a nondegenerate rectangle in Im λ > 0".into()));
    }
    let ev = Evaluator {
        path,
        ode: OdeOptions { rtol: opt.rtol, atol: opt.atol, ..Default::default() },
        count: std::cell::Cell::new(0),
    };
    let n = winding(&ev, search, opt.boundary_tol)?;
    let mut diag = SpectrumDiagnostics { winding: n, ..Default::default() };
    if n == 0 {
        diag.evaluations = ev.count.get();
        return Ok((DiscreteSpectrum::empty(), diag));
    }
    let mut found: Vec<(SearchBox, C64)> = Vec::new();
    isolate(&ev, *search, n, opt, 0, &mut found)?;
    for i in 0..found.len() {
        for j in 0..i {
            if (found[i].1 - found[j].1).norm() < 1e-6 {
                return Err(DymError::MultipleZero { near: format!("{}", found[i].1) });
            }
        }
    }
    if found.len() as i64 != n {
        return Err(DymError::CountMismatch { counted: n, found: found.len() });
    }
    found.sort_by(|p, q| p.1.im.partial_cmp(&q.1.im).unwrap().then(p.1.re.partial_cmp(&q.1.re).unwrap()));
    let poles: Vec<C64> = found.iter().map(|f| f.1).collect();
    let mut norming = Vec::new();
    for (k, &z) in poles.iter().enumerate() {
        let ap = ev.a_prime(z)?;
        if ap.norm() < opt.simple_tol {
            return Err(DymError::MultipleZero { near: format!("{z}") });
        }
        let mut rho = 0.25 * z.im;
        for (j, w) in poles.iter().enumerate() {
            if j != k {
                rho = rho.min(0.4 * (z - w).norm());
            }
        }
        let mut err = None;
        let apc = circle_integral(z, rho, 32, |s| match ev.a(s) {
            Ok(v) => v / ((s - z) * (s - z)),
            Err(e) => {
                err = Some(e);
                C64::new(0.0, 0.0)
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        let b = b_at_zero(path, z, &ev.ode)?;
        norming.push(b / ap);
        diag.a_prime_fd.push(ap);
        diag.a_prime_contour.push(apc);
        diag.residual.push(ev.a(z)?.norm());
    }
    diag.evaluations = ev.count.get();

    Ok((DiscreteSpectrum::new(poles, norming)?, diag))
}
