//! The 1-soliton + bump datum used for the end-to-end comparison.
//!
//! The datum is given through s = √w = u^{−1/2} in the reciprocal variable y:
//! s = tanh(η(y − y_s)) + ε exp(−(y − y_b)²/w²). The direct side evolves
//! V = s''/s by KdV; the inverse side scatters on the shifted contour y + i·shift.

use crate::asymptotics::{asymptotic_solution, AsymptoticOptions, AsymptoticSample};
use crate::conjugation::Reflection;
use crate::direct::{evolve_field, kdv_potential, q_from_s, reconstruct_s, Equation, SolverConfig, Trajectory};
use crate::error::{DymError, Result};
use crate::linalg::{stanh, C64, ONE};
use crate::scattering::{scattering_on_path, symmetric_grid, ScatterOptions, ScatteringData};
use crate::soliton::{Cone, ContourProfile};
use crate::spectrum::{locate_discrete_spectrum, DiscreteSpectrum, SearchBox, SpectrumOptions};
use crate::spline::CubicSpline;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct SolitonBump {
    pub eta: f64,
    pub soliton_center: f64,
    pub bump_amplitude: f64,
    pub bump_center: f64,
    pub bump_width: f64,
    /// imaginary offset of the scattering contour
    pub contour_shift: f64,
    pub contour: (f64, f64),
    pub lambda_max: f64,
    pub lambda_half_points: usize,
    pub search: SearchBox,
}

impl Default for SolitonBump {
    fn default() -> Self {
        SolitonBump {
            eta: 0.5,
            soliton_center: 20.0,
            bump_amplitude: 0.02,
            bump_center: 0.0,
            bump_width: 3.0,
            contour_shift: 0.5,
            contour: (-60.0, 80.0),
            lambda_max: 4.0,
            lambda_half_points: 200,
            search: SearchBox { re_min: -1.0, re_max: 1.0, im_min: 0.05, im_max: 1.5 },
        }
    }
}

impl SolitonBump {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: &str| Err(DymError::ConfigInvalid { field: field.into(), msg: msg.into() });
        if !(self.eta > 0.0) {
            return bad("eta", "must be positive");
        }
        if !(self.bump_width > 0.0) {
            return bad("bump_width", "must be positive");
        }
        if !(self.contour_shift > 0.0) {
            return bad("contour_shift", "must be positive");
        }
        if !(self.contour.1 > self.contour.0) {
            return bad("contour", "empty interval");
        }
        if !(self.lambda_max > 0.0) || self.lambda_half_points < 2 {
            return bad("lambda_max", "degenerate lambda grid");
        }
        if !(self.search.re_max > self.search.re_min && self.search.im_max > self.search.im_min) || self.search.im_min <= 0.0 {
            return bad("search", "degenerate search box");
        }
        Ok(())
    }

    /// (s, s′) at complex y.
    pub fn s_and_ds(&self, z: C64) -> (C64, C64) {
        let th = stanh((z - self.soliton_center) * self.eta);
        let d = z - self.bump_center;
        let w2 = self.bump_width * self.bump_width;
        let g = (-d * d / w2).exp() * self.bump_amplitude;
        (th + g, (ONE - th * th) * self.eta + g * d * (-2.0 / w2))
    }

    /// (s, s″) at complex y.
    pub fn s_and_dds(&self, z: C64) -> (C64, C64) {
        let th = stanh((z - self.soliton_center) * self.eta);
        let d = z - self.bump_center;
        let w2 = self.bump_width * self.bump_width;
        let g = (-d * d / w2).exp() * self.bump_amplitude;
        let dd = (ONE - th * th) * th * (-2.0 * self.eta * self.eta) + g * (d * d * (4.0 / (w2 * w2)) - 2.0 / w2);
        (th + g, dd)
    }

    pub fn contour_profile(&self) -> ContourProfile {
        let me = *self;
        ContourProfile::from_sqrt_w(self.contour_shift, self.contour.0, self.contour.1, Arc::new(move |z| me.s_and_ds(z)))
    }

    /// Discrete spectrum and reflection samples of the datum.
    pub fn scattering(&self, opt: &ScatterOptions) -> Result<(DiscreteSpectrum, ScatteringData)> {
        self.validate()?;
        let path = self.contour_profile();
        let (spec, _) = locate_discrete_spectrum(&path, &self.search, &SpectrumOptions::default())
            .map_err(|e| e.context("discrete spectrum of the soliton+bump datum"))?;
        let grid = symmetric_grid(self.lambda_max, self.lambda_half_points);
        let data = scattering_on_path(&path, &grid, opt).map_err(|e| e.context("reflection of the soliton+bump datum"))?;
        Ok((spec, data))
    }

    /// V = s″/s on a real grid, by the circle mean (regular at the zero of s).
    pub fn kdv_initial(&self, y: &[f64]) -> Vec<f64> {
        let me = *self;
        let f = move |z: C64| me.s_and_dds(z);
        y.par_iter().map(|&yy| kdv_potential(&f, yy, 0.3)).collect()
    }

    /// Direct evolution in the reciprocal frame.
    pub fn evolve(&self, times: &[f64], cfg: &SolverConfig) -> Result<Trajectory> {
        let y = cfg.grid();
        evolve_field(Equation::Kdv, &self.kdv_initial(&y), times, cfg)
    }
}

/// Solver settings that resolve the datum up to t = 30 without wrap-around.
pub fn default_kdv_config() -> SolverConfig {
    SolverConfig { n: 16384, x_min: -1000.0, x_max: 300.0, dt: 0.01, adaptive: false, filter: false, ..Default::default() }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ConeRow {
    pub y: f64,
    pub t: f64,
    pub q_asy: f64,
    pub q_with_e1: f64,
    pub q_direct: f64,
    pub x_asy: f64,
}

impl ConeRow {
    pub fn err(&self) -> f64 {
        (self.q_asy - self.q_direct).abs()
    }
    pub fn err_e1(&self) -> f64 {
        (self.q_with_e1 - self.q_direct).abs()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConeComparison {
    pub t: f64,
    pub sup_err: f64,
    pub sup_err_e1: f64,
    pub rows: Vec<ConeRow>,
}

/// Asymptotic formula vs the direct field on the cone slice at each time of `traj`.
pub fn compare_on_cone(
    spec: &DiscreteSpectrum,
    refl: &Reflection,
    cone: &Cone,
    traj: &Trajectory,
    slice: (usize, usize),
    opt: &AsymptoticOptions,
) -> Result<Vec<ConeComparison>> {
    let y = &traj.states[0].x;
    let mut out = Vec::new();
    for st in &traj.states {
        if st.t <= 0.0 {
            continue;
        }
        let s = reconstruct_s(y, &st.field);
        let q = CubicSpline::new(y, &q_from_s(&s));
        let samples: Vec<AsymptoticSample> = cone
            .slice(st.t, slice.0, slice.1)
            .par_iter()
            .map(|&yy| asymptotic_solution(spec, refl, cone, yy, st.t, opt))
            .collect::<Result<_>>()?;
        let rows: Vec<ConeRow> = samples
            .iter()
            .map(|a| ConeRow { y: a.y, t: a.t, q_asy: a.q_asy, q_with_e1: a.q_with_e1, q_direct: q.eval(a.y), x_asy: a.x_asy })
            .collect();
        let sup_err = rows.iter().map(ConeRow::err).fold(0.0, f64::max);
        let sup_err_e1 = rows.iter().map(ConeRow::err_e1).fold(0.0, f64::max);
        out.push(ConeComparison { t: st.t, sup_err, sup_err_e1, rows });
    }
    Ok(out)
}

/// The comparison cone: y0 ∈ [−1, 1], v ∈ [−2, −0.5].
pub fn default_cone() -> Cone {
    Cone { y1: -1.0, y2: 1.0, v1: -2.0, v2: -0.5 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_finite_differences() {
        let sb = SolitonBump::default();
        for &y in &[-3.0, 0.7, 19.0, 21.5] {
            let z = C64::new(y, 0.2);
            let h = 1e-4;
            let (s0, ds) = sb.s_and_ds(z);
            let (sp, _) = sb.s_and_ds(z + h);
            let (sm, _) = sb.s_and_ds(z - h);
            assert!(((sp - sm) / (2.0 * h) - ds).norm() < 1e-7);
            let (_, dds) = sb.s_and_dds(z);
            assert!(((sp - s0 * 2.0 + sm) / (h * h) - dds).norm() < 1e-5);
        }
    }

    #[test]
    fn validate_names_field() {
        let sb = SolitonBump { bump_width: 0.0, ..Default::default() };
        match sb.validate() {
            Err(DymError::ConfigInvalid { field, .. }) => assert_eq!(field, "bump_width"),
            other => panic!("{other:?}"),
        }
    }
}
