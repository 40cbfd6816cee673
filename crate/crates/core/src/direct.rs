//! Direct pseudo-spectral solvers: the Harry Dym flux form on a periodic
//! x-grid, and its reciprocal KdV form on a periodic y-grid.

use crate::error::{DymError, Result};
use crate::linalg::{c, C64, I, ONE, ZERO};
use crate::profile::InitialProfile;
use crate::spline::CubicSpline;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    /// u_t = (−½ w_x² + w w_xx)_x, w = 1/u
    HarryDym,
    /// V_t − 6 V V_y + V_yyy = 0
    Kdv,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverConfig {
    pub n: usize,
    pub x_min: f64,
    pub x_max: f64,
    /// initial (or fixed) step
    pub dt: f64,
    pub adaptive: bool,
    pub rtol: f64,
    pub atol: f64,
    pub u_min: f64,
    /// abort when max |field| exceeds this
    pub blowup: f64,
    pub max_steps: usize,
    /// Hou-Li filter on the nonlinear term
    pub filter: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            n: 512,
            x_min: -40.0,
            x_max: 40.0,
            dt: 1e-3,
            adaptive: true,
            rtol: 1e-9,
            atol: 1e-11,
            u_min: 1e-3,
            blowup: 1e3,
            max_steps: 2_000_000,
            filter: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: &str| Err(DymError::ConfigInvalid { field: field.into(), msg: msg.into() });
        if self.n < 16 || self.n % 2 != 0 {
            return bad("n", "must be even and at least 16");
        }
        if !(self.x_max > self.x_min) {
            return bad("x_max", "must exceed x_min");
        }
        if !(self.dt > 0.0) {
            return bad("dt", "must be positive");
        }
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return bad("rtol", "tolerances must be positive");
        }
        if !(self.u_min > 0.0) {
            return bad("u_min", "must be positive");
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let h = (self.x_max - self.x_min) / self.n as f64;
        (0..self.n).map(|j| self.x_min + h * j as f64).collect()
    }
}

struct Spectral {
    n: usize,
    k: Vec<f64>,
    filter: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Spectral {
    fn new(n: usize, len: f64, use_filter: bool) -> Self {
        let mut planner = FftPlanner::new();
        let k: Vec<f64> = (0..n)
            .map(|j| {
                let m = if j < n / 2 { j as f64 } else if j == n / 2 { 0.0 } else { j as f64 - n as f64 };
                2.0 * PI * m / len
            })
            .collect();
        let kmax = PI * n as f64 / len;
        let filter = k.iter().map(|&kk| if use_filter { (-36.0 * (kk.abs() / kmax).powi(36)).exp() } else { 1.0 }).collect();
        Spectral { n, k, filter, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    fn forward(&self, v: &[f64]) -> Vec<C64> {
        let mut b: Vec<C64> = v.iter().map(|&x| c(x, 0.0)).collect();
        self.fwd.process(&mut b);
        b
    }

    fn inverse(&self, v: &[C64]) -> Vec<f64> {
        let mut b = v.to_vec();
        self.inv.process(&mut b);
        let s = 1.0 / self.n as f64;
        b.iter().map(|z| z.re * s).collect()
    }

    fn deriv(&self, vh: &[C64], order: u32) -> Vec<f64> {
        let d: Vec<C64> = vh.iter().zip(&self.k).map(|(z, &k)| z * (I * k).powu(order)).collect();
        self.inverse(&d)
    }
}

struct Etd {
    e: Vec<C64>,
    e2: Vec<C64>,
    q: Vec<C64>,
    f1: Vec<C64>,
    f2: Vec<C64>,
    f3: Vec<C64>,
}

impl Etd {
    /// Kassam–Trefethen coefficients by a contour mean over 32 points.
    fn new(l: &[C64], h: f64) -> Self {
        let m = 32;
        let roots: Vec<C64> = (1..=m).map(|j| (I * PI * (j as f64 - 0.5) / m as f64).exp()).collect();
        let n = l.len();
        let mut out = Etd {
            e: Vec::with_capacity(n),
            e2: Vec::with_capacity(n),
            q: Vec::with_capacity(n),
            f1: Vec::with_capacity(n),
            f2: Vec::with_capacity(n),
            f3: Vec::with_capacity(n),
        };
        for &lk in l {
            let lh = lk * h;
            out.e.push(lh.exp());
            out.e2.push((lh * 0.5).exp());
            let (mut q, mut a, mut b, mut cc) = (ZERO, ZERO, ZERO, ZERO);
            for r in &roots {
                // both r and −r: the mean is then real-symmetric for real L
                for z in [lh + r, lh - r] {
                    let ez = z.exp();
                    let z3 = z * z * z;
                    q += ((z * 0.5).exp() - ONE) / z;
                    a += (-4.0 - z + ez * (4.0 - z * 3.0 + z * z)) / z3;
                    b += (2.0 + z + ez * (z - 2.0)) / z3;
                    cc += (-4.0 - z * 3.0 - z * z + ez * (4.0 - z)) / z3;
                }
            }
            let s = h / (2 * m) as f64;
            out.q.push(q * s);
            out.f1.push(a * s);
            out.f2.push(b * s);
            out.f3.push(cc * s);
        }
        out
    }
}

/// Snapshot of the field.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvolutionState {
    pub t: f64,
    pub x: Vec<f64>,
    /// u for Harry Dym, V for KdV
    pub field: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct InvariantRecord {
    pub t: f64,
    /// ∫(u − 1) dx (Harry Dym) or ∫V dy (KdV)
    pub c: f64,
    /// ∫q dx and ∫x q dx with q = u² − 1 (zero for KdV)
    pub moments: [f64; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    pub equation: Equation,
    pub states: Vec<EvolutionState>,
    pub invariants: Vec<InvariantRecord>,
    pub accepted: usize,
    pub rejected: usize,
    pub min_dt: f64,
}

impl Trajectory {
    pub fn last(&self) -> &EvolutionState {
        self.states.last().unwrap()
    }

    /// Largest relative change of c across the run, per unit time.
    pub fn c_drift_rate(&self) -> f64 {
        let c0 = self.invariants[0].c;
        let t0 = self.invariants[0].t;
        self.invariants
            .iter()
            .skip(1)
            .map(|r| (r.c - c0).abs() / c0.abs().max(1.0) / (r.t - t0).abs().max(1e-300))
            .fold(0.0, f64::max)
    }
}

fn invariants(eq: Equation, t: f64, x: &[f64], f: &[f64], h: f64) -> InvariantRecord {
    match eq {
        Equation::HarryDym => {
            let c = f.iter().map(|u| u - 1.0).sum::<f64>() * h;
            let q: Vec<f64> = f.iter().map(|u| u * u - 1.0).collect();
            let m0 = q.iter().sum::<f64>() * h;
            let m1 = q.iter().zip(x).map(|(q, x)| q * x).sum::<f64>() * h;
            InvariantRecord { t, c, moments: [m0, m1] }
        }
        Equation::Kdv => InvariantRecord { t, c: f.iter().sum::<f64>() * h, moments: [0.0, 0.0] },
    }
}

struct Stepper<'a> {
    eq: Equation,
    sp: Spectral,
    l: Vec<C64>,
    cfg: &'a SolverConfig,
    cache: Vec<(f64, Etd)>,
}

impl<'a> Stepper<'a> {
    fn new(eq: Equation, cfg: &'a SolverConfig) -> Self {
        let sp = Spectral::new(cfg.n, cfg.x_max - cfg.x_min, cfg.filter);
        // both equations linearize to f_t = −f_xxx about the background
        let l = sp.k.iter().map(|&k| I * k * k * k).collect();
        Stepper { eq, sp, l, cfg, cache: Vec::new() }
    }

    fn coeffs(&mut self, h: f64) -> usize {
        if let Some(i) = self.cache.iter().position(|(hh, _)| *hh == h) {
            return i;
        }
        if self.cache.len() > 8 {
            self.cache.remove(0);
        }
        self.cache.push((h, Etd::new(&self.l, h)));
        self.cache.len() - 1
    }

    fn nonlinear(&self, vh: &[C64]) -> std::result::Result<Vec<C64>, f64> {
        let sp = &self.sp;
        let flux = match self.eq {
            Equation::HarryDym => {
                let u = sp.inverse(vh);
                let umin = u.iter().cloned().fold(f64::INFINITY, f64::min);
                if !(umin > self.cfg.u_min) {
                    return Err(umin);
                }
                let w: Vec<f64> = u.iter().map(|x| 1.0 / x).collect();
                let wh = sp.forward(&w);
                let wx = sp.deriv(&wh, 1);
                let wxx = sp.deriv(&wh, 2);
                (0..sp.n).map(|j| -0.5 * wx[j] * wx[j] + w[j] * wxx[j]).collect::<Vec<f64>>()
            }
            Equation::Kdv => {
                let v = sp.inverse(vh);
                v.iter().map(|x| 3.0 * x * x).collect()
            }
        };
        let fh = sp.forward(&flux);
        Ok((0..sp.n)
            .map(|j| {
                let k = sp.k[j];
                let full = I * k * fh[j] * sp.filter[j];
                match self.eq {
                    Equation::HarryDym => full - self.l[j] * vh[j],
                    Equation::Kdv => full,
                }
            })
            .collect())
    }

    fn step(&mut self, vh: &[C64], h: f64) -> std::result::Result<Vec<C64>, f64> {
        let idx = self.coeffs(h);
        let nv = self.nonlinear(vh)?;
        let co = &self.cache[idx].1;
        let n = vh.len();
        let a: Vec<C64> = (0..n).map(|j| co.e2[j] * vh[j] + co.q[j] * nv[j]).collect();
        let na = self.nonlinear(&a)?;
        let co = &self.cache[idx].1;
        let b: Vec<C64> = (0..n).map(|j| co.e2[j] * vh[j] + co.q[j] * na[j]).collect();
        let nb = self.nonlinear(&b)?;
        let co = &self.cache[idx].1;
        let cc: Vec<C64> = (0..n).map(|j| co.e2[j] * a[j] + co.q[j] * (nb[j] * 2.0 - nv[j])).collect();
        let nc = self.nonlinear(&cc)?;
        let co = &self.cache[idx].1;
        Ok((0..n)
            .map(|j| co.e[j] * vh[j] + nv[j] * co.f1[j] + (na[j] + nb[j]) * co.f2[j] * 2.0 + nc[j] * co.f3[j])
            .collect())
    }
}

/// Integrate `eq` from the periodic samples `f0` (on `cfg.grid()`) through
/// the listed output times (ascending, or descending for backward runs).
pub fn evolve_field(eq: Equation, f0: &[f64], times: &[f64], cfg: &SolverConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if f0.len() != cfg.n {
        return Err(DymError::InvalidInput("initial samples do not match the grid".into()));
    }
    let x = cfg.grid();
    let hx = (cfg.x_max - cfg.x_min) / cfg.n as f64;
    if eq == Equation::HarryDym {
        if let Some(j) = f0.iter().position(|&u| !(u > cfg.u_min)) {
            return Err(DymError::CuspApproach { t: 0.0, min_u: f0[j] });
        }
    }
    let mut st = Stepper::new(eq, cfg);
    let mut vh = st.sp.forward(f0);
    let mut t = 0.0;
    let mut traj = Trajectory {
        equation: eq,
        states: vec![EvolutionState { t, x: x.clone(), field: f0.to_vec() }],
        invariants: vec![invariants(eq, t, &x, f0, hx)],
        accepted: 0,
        rejected: 0,
        min_dt: f64::INFINITY,
    };
    let mut dt = cfg.dt;
    let mut steps = 0usize;
    for &t_out in times {
        let dir = if t_out >= t { 1.0 } else { -1.0 };
        while (t_out - t) * dir > 1e-14 * t_out.abs().max(1.0) {
            steps += 1;
            if steps > cfg.max_steps {
                return Err(DymError::StepFailure { t });
            }
            let h = dir * dt.min((t_out - t).abs());
            let cusp = |e: f64, t: f64| DymError::CuspApproach { t, min_u: e };
            let next = if cfg.adaptive {
                let full = st.step(&vh, h).map_err(|e| cusp(e, t))?;
                let half = st.step(&vh, 0.5 * h).map_err(|e| cusp(e, t))?;
                let two = st.step(&half, 0.5 * h).map_err(|e| cusp(e, t))?;
                let uf = st.sp.inverse(&full);
                let ut = st.sp.inverse(&two);
                let scale = ut.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let err = uf.iter().zip(&ut).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
                    / (cfg.atol + cfg.rtol * scale);
                let fac = if err > 0.0 { (0.9 * err.powf(-0.2)).clamp(0.2, 2.0) } else { 2.0 };
                if err > 1.0 || !err.is_finite() {
                    traj.rejected += 1;
                    dt = h.abs() * fac.min(0.5);
                    if dt < 1e-12 {
                        return Err(DymError::StepFailure { t });
                    }
                    continue;
                }
                if h.abs() == dt {
                    dt *= fac;
                }
                // local extrapolation
                two.iter().zip(&full).map(|(b, a)| b + (b - a) / 15.0).collect::<Vec<C64>>()
            } else {
                st.step(&vh, h).map_err(|e| cusp(e, t))?
            };
            let f = st.sp.inverse(&next);
            let fmax = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if !fmax.is_finite() || fmax > cfg.blowup {
                return Err(DymError::BlowupDetected { t });
            }
            if eq == Equation::HarryDym {
                let umin = f.iter().cloned().fold(f64::INFINITY, f64::min);
                if umin < cfg.u_min {
                    return Err(DymError::CuspApproach { t: t + h, min_u: umin });
                }
            }
            traj.min_dt = traj.min_dt.min(h.abs());
            traj.accepted += 1;
            vh = next;
            t += h;
        }
        t = t_out;
        let f = st.sp.inverse(&vh);
        traj.invariants.push(invariants(eq, t, &x, &f, hx));
        traj.states.push(EvolutionState { t, x: x.clone(), field: f });
    }
    Ok(traj)
}

/// Harry Dym evolution of a validated profile: u is sampled on the periodic
/// grid (u = 1 outside the profile span).
pub fn evolve(profile: &InitialProfile, times: &[f64], cfg: &SolverConfig) -> Result<Trajectory> {
    let u0: Vec<f64> = cfg.grid().iter().map(|&x| profile.u_at(x)).collect();
    evolve_field(Equation::HarryDym, &u0, times, cfg)
}

/// max |(u²)_t − 2(1/u)_xxx| at the middle state, with a centred time difference.
pub fn hd_pde_residual(cfg: &SolverConfig, prev: &[f64], mid: &[f64], next: &[f64], h: f64) -> f64 {
    let sp = Spectral::new(cfg.n, cfg.x_max - cfg.x_min, false);
    let w: Vec<f64> = mid.iter().map(|u| 1.0 / u).collect();
    let w3 = sp.deriv(&sp.forward(&w), 3);
    (0..cfg.n)
        .map(|j| ((next[j] * next[j] - prev[j] * prev[j]) / (2.0 * h) - 2.0 * w3[j]).abs())
        .fold(0.0, f64::max)
}

/// V = s''/s, averaged over a circle of radius `rho` around each real y
/// (exact for V analytic in the disc, and well defined at real zeros of s).
pub fn kdv_potential(s_and_dd: &(dyn Fn(C64) -> (C64, C64) + Sync), y: f64, rho: f64) -> f64 {
    let m = 32;
    let mut acc = ZERO;
    for j in 0..m {
        let z = c(y, 0.0) + (I * 2.0 * PI * (j as f64 + 0.5) / m as f64).exp() * rho;
        let (s, dd) = s_and_dd(z);
        acc += dd / s;
    }
    (acc / m as f64).re
}

/// Solve s'' = V s from the right end with s = 1, s′ = 0 (Numerov).
pub fn reconstruct_s(y: &[f64], v: &[f64]) -> Vec<f64> {
    let n = y.len();
    let h = y[1] - y[0];
    let g = h * h / 12.0;
    let mut s = vec![1.0; n];
    for j in (1..n - 1).rev() {
        s[j - 1] = (2.0 * s[j] * (1.0 + 5.0 * g * v[j]) - s[j + 1] * (1.0 - g * v[j + 1])) / (1.0 - g * v[j - 1]);
    }
    s
}

/// q = u² − 1 = s⁻⁴ − 1.
pub fn q_from_s(s: &[f64]) -> Vec<f64> {
    s.iter().map(|v| v.powi(-4) - 1.0).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    Sup,
    L2,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CompareReport {
    pub sup: f64,
    pub l2: f64,
    pub argmax: f64,
    pub points: usize,
}

impl CompareReport {
    pub fn get(&self, n: Norm) -> f64 {
        match n {
            Norm::Sup => self.sup,
            Norm::L2 => self.l2,
        }
    }
}

/// Interpolate both fields (cubic) to the finer of the two grids restricted
/// to the common range and report sup/L2 differences.
pub fn compare(xa: &[f64], fa: &[f64], xb: &[f64], fb: &[f64]) -> Result<CompareReport> {
    if xa.len() < 4 || xb.len() < 4 || xa.len() != fa.len() || xb.len() != fb.len() {
        return Err(DymError::InvalidInput("fields need at least 4 matching samples".into()));
    }
    let lo = xa[0].max(xb[0]);
    let hi = xa[xa.len() - 1].min(xb[xb.len() - 1]);
    if !(hi > lo) {
        return Err(DymError::DisjointDomains);
    }
    let sa = CubicSpline::new(xa, fa);
    let sb = CubicSpline::new(xb, fb);
    let base = if xa.len() >= xb.len() { xa } else { xb };
    let pts: Vec<f64> = base.iter().cloned().filter(|&x| x >= lo && x <= hi).collect();
    let mut sup = 0.0;
    let mut argmax = lo;
    let mut sq = Vec::with_capacity(pts.len());
    for &x in &pts {
        let d = (sa.eval(x) - sb.eval(x)).abs();
        if d > sup {
            sup = d;
            argmax = x;
        }
        sq.push(d * d);
    }
    let l2 = if pts.len() >= 2 { crate::quad::trapezoid(&pts, &sq).sqrt() } else { sup };
    Ok(CompareReport { sup, l2, argmax, points: pts.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> SolverConfig {
        SolverConfig { n: 256, x_min: -30.0, x_max: 30.0, dt: 2e-3, ..Default::default() }
    }

    fn bump(x: f64) -> f64 {
        1.0 + 0.05 * (-(x * x) / 4.0).exp()
    }

    #[test]
    fn zero_datum_is_fixed() {
        let cfg = small_cfg();
        let tr = evolve_field(Equation::HarryDym, &vec![1.0; cfg.n], &[0.5, 1.0], &cfg).unwrap();
        let e = tr.last().field.iter().map(|u| (u - 1.0).abs()).fold(0.0, f64::max);
        assert!(e <= 1e-12, "{e}");
    }

    #[test]
    fn conservation_and_residual() {
        let cfg = small_cfg();
        let u0: Vec<f64> = cfg.grid().iter().map(|&x| bump(x)).collect();
        let h = 1e-3;
        let tr = evolve_field(Equation::HarryDym, &u0, &[1.0 - h, 1.0, 1.0 + h], &cfg).unwrap();
        assert!(tr.c_drift_rate() < 1e-10, "{}", tr.c_drift_rate());
        let r = hd_pde_residual(&cfg, &tr.states[1].field, &tr.states[2].field, &tr.states[3].field, h);
        assert!(r < 1e-5, "{r}");
    }

    #[test]
    fn time_reversal() {
        let cfg = small_cfg();
        let u0: Vec<f64> = cfg.grid().iter().map(|&x| bump(x)).collect();
        let tr = evolve_field(Equation::HarryDym, &u0, &[0.5, 0.0], &cfg).unwrap();
        let e = tr.last().field.iter().zip(&u0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(e < 1e-6, "{e}");
    }

    #[test]
    fn cusp_guard() {
        let mut cfg = small_cfg();
        cfg.u_min = 0.99;
        let u0: Vec<f64> = cfg.grid().iter().map(|&x| 1.0 - 0.05 * (-(x * x)).exp()).collect();
        assert!(matches!(evolve_field(Equation::HarryDym, &u0, &[0.1], &cfg), Err(DymError::CuspApproach { .. })));
    }

    #[test]
    fn kdv_soliton_translates() {
        let eta = 0.7;
        let cfg = SolverConfig { n: 512, x_min: -40.0, x_max: 40.0, dt: 1e-2, adaptive: false, ..Default::default() };
        let v = |y: f64, t: f64| -2.0 * eta * eta / (eta * (y - 4.0 * eta * eta * t)).cosh().powi(2);
        let v0: Vec<f64> = cfg.grid().iter().map(|&y| v(y, 0.0)).collect();
        let tr = evolve_field(Equation::Kdv, &v0, &[2.0], &cfg).unwrap();
        let e = tr.last().field.iter().zip(cfg.grid()).map(|(a, y)| (a - v(y, 2.0)).abs()).fold(0.0, f64::max);
        assert!(e < 1e-6, "{e}");
    }

    #[test]
    fn numerov_tanh() {
        let eta = 0.5;
        let y: Vec<f64> = (0..4001).map(|j| -40.0 + 0.02 * j as f64).collect();
        let v: Vec<f64> = y.iter().map(|&y| -2.0 * eta * eta / (eta * (y - 3.0)).cosh().powi(2)).collect();
        let s = reconstruct_s(&y, &v);
        let e = s.iter().zip(&y).map(|(s, &y)| (s - (eta * (y - 3.0)).tanh()).abs()).fold(0.0, f64::max);
        assert!(e < 1e-6, "{e}");
        let pot = |z: C64| {
            let th = ((z - 3.0) * eta).tanh();
            let sech2 = ONE - th * th;
            (th, sech2 * th * (-2.0 * eta * eta))
        };
        let v3 = kdv_potential(&pot, 3.0, 0.3);
        assert!((v3 + 2.0 * eta * eta).abs() < 1e-12, "{v3}");
    }

    #[test]
    fn compare_basics() {
        let x: Vec<f64> = (0..200).map(|j| j as f64 * 0.05).collect();
        let f: Vec<f64> = x.iter().map(|x| x.sin()).collect();
        let r = compare(&x, &f, &x, &f).unwrap();
        assert_eq!(r.sup, 0.0);
        let g: Vec<f64> = x.iter().map(|x| (x + 0.05).sin()).collect();
        let r = compare(&x, &f, &x, &g).unwrap();
        let want = x.iter().map(|x| ((x + 0.05).sin() - x.sin()).abs()).fold(0.0, f64::max);
        assert!((r.sup - want).abs() < 1e-12);
        let far: Vec<f64> = x.iter().map(|x| x + 100.0).collect();
        assert!(matches!(compare(&x, &f, &far, &f), Err(DymError::DisjointDomains)));
    }
}
