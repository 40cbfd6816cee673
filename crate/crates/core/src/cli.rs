//! Run configuration, command dispatch, manifests and flat-file output.

use crate::asymptotics::{asymptotic_solution, phase_signature, re_2i_theta, re_2i_theta_direct, AsymptoticOptions, AsymptoticSample, PhaseGeometry, QReading};
use crate::conjugation::Reflection;
use crate::direct::{evolve, SolverConfig, Trajectory};
use crate::error::{DymError, Result};
use crate::linalg::C64;
use crate::profile::{validate_profile, InitialProfile, ProfileFamily, ProfileOptions};
use crate::scattering::{scattering_coefficients, symmetric_grid, ScatterOptions, ScatteringData};
use crate::scenario::{compare_on_cone, ConeComparison, SolitonBump};
use crate::soliton::{soliton_sample, Cone, ParametricSample};
use crate::spectrum::{locate_discrete_spectrum, DiscreteSpectrum, SearchBox, SpectrumDiagnostics, SpectrumOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

fn bad<T>(field: impl Into<String>, msg: impl Into<String>) -> Result<T> {
    Err(DymError::ConfigInvalid { field: field.into(), msg: msg.into() })
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        bad(field, format!("must be positive and finite, got {v}"))
    }
}

fn range(field: &str, r: (f64, f64)) -> Result<()> {
    if r.0.is_finite() && r.1.is_finite() && r.1 > r.0 {
        Ok(())
    } else {
        bad(field, format!("empty range ({}, {})", r.0, r.1))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub family: ProfileFamily,
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    #[serde(default)]
    pub options: ProfileOptions,
}

impl ProfileSpec {
    fn validate(&self, at: &str) -> Result<()> {
        range(&format!("{at}.x_min"), (self.x_min, self.x_max))?;
        if self.n < 64 {
            return bad(format!("{at}.n"), "need at least 64 points");
        }
        positive(&format!("{at}.options.decay_margin"), self.options.decay_margin)?;
        if let Some(m) = self.options.moment_tol {
            positive(&format!("{at}.options.moment_tol"), m)?;
        }
        Ok(())
    }

    pub fn build(&self) -> Result<InitialProfile> {
        let (x, q) = self.family.sample(self.x_min, self.x_max, self.n);
        validate_profile(&x, &q, &self.options)
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lambda_max: f64,
    pub half_points: usize,
}

impl GridSpec {
    fn validate(&self, at: &str) -> Result<()> {
        positive(&format!("{at}.lambda_max"), self.lambda_max)?;
        if self.half_points < 2 {
            return bad(format!("{at}.half_points"), "need at least 2");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterCfg {
    pub profile: ProfileSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub options: ScatterOptions,
    #[serde(default = "default_symmetry_tol")]
    pub symmetry_tol: f64,
}

fn default_symmetry_tol() -> f64 {
    1e-8
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumCfg {
    pub profile: ProfileSpec,
    pub search: SearchBox,
    #[serde(default)]
    pub options: SpectrumOptions,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonCfg {
    /// poles λ_n as [re, im]
    pub poles: Vec<C64>,
    pub norming: Vec<C64>,
    pub y_range: (f64, f64),
    pub n: usize,
    pub times: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoteCfg {
    #[serde(default)]
    pub scenario: SolitonBump,
    pub cone: Cone,
    pub times: Vec<f64>,
    pub slice: (usize, usize),
    #[serde(default)]
    pub options: AsymptoticOptions,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvolveSource {
    /// Harry Dym in x for an admissible profile
    Profile(ProfileSpec),
    /// KdV in the reciprocal frame for the soliton + bump datum
    SolitonBump(SolitonBump),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveCfg {
    pub source: EvolveSource,
    pub solver: SolverConfig,
    pub times: Vec<f64>,
    #[serde(default = "default_drift_tol")]
    pub drift_tol: f64,
}

fn default_drift_tol() -> f64 {
    1e-6
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareCfg {
    #[serde(default)]
    pub scenario: SolitonBump,
    pub cone: Cone,
    pub solver: SolverConfig,
    pub times: Vec<f64>,
    pub slice: (usize, usize),
    /// floor of the sup-error tolerance
    pub tolerance: f64,
    /// time at which C in C·t^{−1/2} is fitted
    pub fit_time: f64,
    #[serde(default)]
    pub options: AsymptoticOptions,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignatureCfg {
    pub y: f64,
    pub t: f64,
    pub re_range: (f64, f64),
    pub im_range: (f64, f64),
    pub n_re: usize,
    pub n_im: usize,
    #[serde(default = "default_random_points")]
    pub random_points: usize,
    #[serde(default = "default_agreement_tol")]
    pub agreement_tol: f64,
}

fn default_random_points() -> usize {
    1000
}

fn default_agreement_tol() -> f64 {
    1e-12
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Command {
    Scatter(ScatterCfg),
    Spectrum(SpectrumCfg),
    Soliton(SolitonCfg),
    Asymptote(AsymptoteCfg),
    Evolve(EvolveCfg),
    Compare(CompareCfg),
    Signature(SignatureCfg),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Scatter(_) => "scatter",
            Command::Spectrum(_) => "spectrum",
            Command::Soliton(_) => "soliton",
            Command::Asymptote(_) => "asymptote",
            Command::Evolve(_) => "evolve",
            Command::Compare(_) => "compare",
            Command::Signature(_) => "signature",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    /// default output directory; `--out` overrides it
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    pub command: Command,
}

fn times_ok(field: &str, times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return bad(field, "no times given");
    }
    if times.iter().any(|t| !t.is_finite()) {
        return bad(field, "non-finite time");
    }
    Ok(())
}

fn cone_ok(field: &str, c: &Cone) -> Result<()> {
    if !(c.y2 >= c.y1 && c.v2 >= c.v1) || ![c.y1, c.y2, c.v1, c.v2].iter().all(|v| v.is_finite()) {
        return bad(field, "cone needs y1 <= y2 and v1 <= v2");
    }
    Ok(())
}

fn slice_ok(field: &str, s: (usize, usize)) -> Result<()> {
    if s.0 < 1 || s.1 < 1 {
        return bad(field, "slice counts must be positive");
    }
    Ok(())
}

fn solver_ok(field: &str, s: &SolverConfig) -> Result<()> {
    s.validate().map_err(|e| match e {
        DymError::ConfigInvalid { field: f, msg } => DymError::ConfigInvalid { field: format!("{field}.{f}"), msg },
        other => other,
    })
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig { schema_version: SCHEMA_VERSION, out_dir: None, command }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| DymError::ConfigInvalid { field: "<document>".into(), msg: e.to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// Compact JSON with object keys sorted.
    pub fn canonical_json(&self) -> String {
        let v = serde_json::to_value(self).expect("config serializes");
        serde_json::to_string(&v).expect("value serializes")
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return bad("schema_version", format!("expected {SCHEMA_VERSION}, got {}", self.schema_version));
        }
        match &self.command {
            Command::Scatter(c) => {
                c.profile.validate("command.profile")?;
                c.grid.validate("command.grid")?;
                positive("command.options.ode.rtol", c.options.ode.rtol)?;
                positive("command.options.ode.atol", c.options.ode.atol)?;
                positive("command.options.unitarity_tol", c.options.unitarity_tol)?;
                positive("command.symmetry_tol", c.symmetry_tol)
            }
            Command::Spectrum(c) => {
                c.profile.validate("command.profile")?;
                range("command.search.re_min", (c.search.re_min, c.search.re_max))?;
                range("command.search.im_min", (c.search.im_min, c.search.im_max))?;
                if c.search.im_min <= 0.0 {
                    return bad("command.search.im_min", "box must lie in the upper half-plane");
                }
                positive("command.options.rtol", c.options.rtol)?;
                positive("command.options.atol", c.options.atol)?;
                positive("command.options.boundary_tol", c.options.boundary_tol)?;
                positive("command.options.simple_tol", c.options.simple_tol)?;
                positive("command.options.newton_tol", c.options.newton_tol)
            }
            Command::Soliton(c) => {
                if c.poles.len() != c.norming.len() {
                    return bad("command.norming", "one norming constant per pole");
                }
                range("command.y_range", c.y_range)?;
                if c.n < 2 {
                    return bad("command.n", "need at least 2 points");
                }
                times_ok("command.times", &c.times)?;
                DiscreteSpectrum::new(c.poles.clone(), c.norming.clone())
                    .map(|_| ())
                    .map_err(|e| DymError::ConfigInvalid { field: "command.poles".into(), msg: e.to_string() })
            }
            Command::Asymptote(c) => {
                scenario_ok(&c.scenario)?;
                cone_ok("command.cone", &c.cone)?;
                times_ok("command.times", &c.times)?;
                slice_ok("command.slice", c.slice)?;
                positive("command.options.t_min", c.options.t_min)
            }
            Command::Evolve(c) => {
                match &c.source {
                    EvolveSource::Profile(p) => p.validate("command.source")?,
                    EvolveSource::SolitonBump(s) => scenario_ok(s)?,
                }
                solver_ok("command.solver", &c.solver)?;
                times_ok("command.times", &c.times)?;
                positive("command.drift_tol", c.drift_tol)
            }
            Command::Compare(c) => {
                scenario_ok(&c.scenario)?;
                cone_ok("command.cone", &c.cone)?;
                solver_ok("command.solver", &c.solver)?;
                times_ok("command.times", &c.times)?;
                slice_ok("command.slice", c.slice)?;
                positive("command.tolerance", c.tolerance)?;
                positive("command.fit_time", c.fit_time)?;
                if !c.times.contains(&c.fit_time) {
                    return bad("command.fit_time", "must be one of the comparison times");
                }
                positive("command.options.t_min", c.options.t_min)
            }
            Command::Signature(c) => {
                range("command.re_range", c.re_range)?;
                range("command.im_range", c.im_range)?;
                if c.n_re < 2 || c.n_im < 2 {
                    return bad("command.n_re", "grid needs at least 2x2 points");
                }
                positive("command.t", c.t)?;
                if !(c.y < 0.0) {
                    return bad("command.y", "y/t must be negative");
                }
                positive("command.agreement_tol", c.agreement_tol)
            }
        }
    }
}

fn scenario_ok(s: &SolitonBump) -> Result<()> {
    s.validate().map_err(|e| match e {
        DymError::ConfigInvalid { field, msg } => DymError::ConfigInvalid { field: format!("command.scenario.{field}"), msg },
        other => other,
    })
}

/// Output of a command, persisted as JSON and convertible to long-format CSV.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "artifact", rename_all = "snake_case")]
pub enum Artifact {
    Scattering { data: ScatteringData },
    Spectrum { spectrum: DiscreteSpectrum, diagnostics: SpectrumDiagnostics },
    SolitonField { samples: Vec<ParametricSample> },
    Asymptote { samples: Vec<AsymptoticSample> },
    Evolution { trajectory: Trajectory },
    ConeComparison { comparisons: Vec<ConeComparison>, reading: QReading },
    Signature { geometry: PhaseGeometry },
}

const ARTIFACT_KINDS: [&str; 7] = ["scattering", "spectrum", "soliton_field", "asymptote", "evolution", "cone_comparison", "signature"];

impl Artifact {
    pub fn kind(&self) -> &'static str {
        match self {
            Artifact::Scattering { .. } => "scattering",
            Artifact::Spectrum { .. } => "spectrum",
            Artifact::SolitonField { .. } => "soliton_field",
            Artifact::Asymptote { .. } => "asymptote",
            Artifact::Evolution { .. } => "evolution",
            Artifact::ConeComparison { .. } => "cone_comparison",
            Artifact::Signature { .. } => "signature",
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| DymError::Io(e.to_string()))?;
        let tag = v.get("artifact").and_then(|t| t.as_str()).unwrap_or("<missing>").to_string();
        if !ARTIFACT_KINDS.contains(&tag.as_str()) {
            return Err(DymError::UnknownArtifact(tag));
        }
        serde_json::from_value(v).map_err(|e| DymError::Io(format!("artifact `{tag}`: {e}")))
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| DymError::Io(e.to_string()))?;
    w.write_record(header).map_err(|e| DymError::Io(e.to_string()))?;
    for r in rows {
        w.write_record(&r).map_err(|e| DymError::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn f(vals: &[f64]) -> Vec<String> {
    vals.iter().map(|&v| fmt_f64(v)).collect()
}

/// Write the artifact as one long-format CSV in `dir`; returns the file path.
pub fn emit_plot_data(artifact: &Artifact, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}.csv", artifact.kind()));
    match artifact {
        Artifact::Scattering { data } => write_csv(
            &path,
            &["lambda", "re_a", "im_a", "re_b", "im_b", "re_r", "im_r"],
            (0..data.lambda.len()).map(|i| f(&[data.lambda[i], data.a[i].re, data.a[i].im, data.b[i].re, data.b[i].im, data.r[i].re, data.r[i].im])),
        ),
        Artifact::Spectrum { spectrum, .. } => write_csv(
            &path,
            &["re_lambda", "im_lambda", "abs_c"],
            spectrum.poles.iter().zip(&spectrum.norming).map(|(p, c)| f(&[p.re, p.im, c.norm()])),
        ),
        Artifact::SolitonField { samples } => write_csv(
            &path,
            &["t", "y", "x", "q_hat", "cusp"],
            samples.iter().map(|s| {
                let mut r = f(&[s.t, s.y, s.x, s.q_hat]);
                r.push(s.cusp.to_string());
                r
            }),
        ),
        Artifact::Asymptote { samples } => write_csv(
            &path,
            &["t", "y", "x_asy", "q_asy", "q_with_e1"],
            samples.iter().map(|s| f(&[s.t, s.y, s.x_asy, s.q_asy, s.q_with_e1])),
        ),
        Artifact::Evolution { trajectory } => write_csv(
            &path,
            &["t", "x", "field"],
            trajectory.states.iter().flat_map(|st| st.x.iter().zip(&st.field).map(move |(x, v)| f(&[st.t, *x, *v]))),
        ),
        Artifact::ConeComparison { comparisons, .. } => write_csv(
            &path,
            &["y", "t", "q_asy", "q_direct", "err", "q_with_e1", "err_e1"],
            comparisons
                .iter()
                .flat_map(|c| c.rows.iter())
                .map(|r| f(&[r.y, r.t, r.q_asy, r.q_direct, r.err(), r.q_with_e1, r.err_e1()])),
        ),
        Artifact::Signature { geometry } => write_csv(
            &path,
            &["re_lambda", "im_lambda", "sign"],
            geometry.im.iter().enumerate().flat_map(|(i, &b)| {
                geometry.re.iter().enumerate().map(move |(j, &a)| {
                    let mut r = f(&[a, b]);
                    r.push(geometry.sign[i][j].to_string());
                    r
                })
            }),
        ),
    }?;
    Ok(path)
}

/// Read an artifact JSON file and emit its CSV.
pub fn emit_plot_data_from_file(artifact_json: &Path, dir: &Path) -> Result<PathBuf> {
    let text = fs::read_to_string(artifact_json)?;
    emit_plot_data(&Artifact::from_json(&text)?, dir)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct InvariantOutcome {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl InvariantOutcome {
    /// Passes when value <= tolerance.
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        InvariantOutcome { name: name.into(), value, tolerance, pass: value <= tolerance }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub crate_version: String,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub invariants: Vec<InvariantOutcome>,
    pub notes: BTreeMap<String, String>,
    pub artifacts: Vec<String>,
    pub passed: bool,
}

impl Manifest {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_OK
        } else {
            EXIT_INVARIANT
        }
    }
}

pub struct RunOutcome {
    pub artifact: Artifact,
    pub manifest: Manifest,
}

struct Checks {
    tolerances: BTreeMap<String, f64>,
    invariants: Vec<InvariantOutcome>,
    notes: BTreeMap<String, String>,
}

impl Checks {
    fn new() -> Self {
        Checks { tolerances: BTreeMap::new(), invariants: Vec::new(), notes: BTreeMap::new() }
    }
    fn at_most(&mut self, name: &str, value: f64, tol: f64) {
        self.tolerances.insert(name.into(), tol);
        self.invariants.push(InvariantOutcome::at_most(name, value, tol));
    }
}

fn upstream<T>(r: Result<T>, what: &str) -> Result<T> {
    r.map_err(|e| match e {
        e @ DymError::ConfigInvalid { .. } => e,
        e => e.context(what),
    })
}

fn compute(cfg: &RunConfig, seed: u64) -> Result<(Artifact, Checks)> {
    let mut ck = Checks::new();
    let art = match &cfg.command {
        Command::Scatter(c) => {
            let p = upstream(c.profile.build(), "building the profile")?;
            let grid = symmetric_grid(c.grid.lambda_max, c.grid.half_points);
            let data = upstream(scattering_coefficients(&p, &grid, &c.options), "scattering")?;
            ck.at_most("unitarity", data.unitarity_max_err, c.options.unitarity_tol);
            ck.at_most("schwarz_symmetry", data.symmetry_residual(), c.symmetry_tol);
            Artifact::Scattering { data }
        }
        Command::Spectrum(c) => {
            let p = upstream(c.profile.build(), "building the profile")?;
            let (spectrum, diagnostics) = upstream(locate_discrete_spectrum(&p, &c.search, &c.options), "locating the spectrum")?;
            let res = diagnostics.residual.iter().cloned().fold(0.0, f64::max);
            ck.at_most("zero_residual", res, 1e-8);
            ck.at_most("count_mismatch", (diagnostics.winding - spectrum.len() as i64).abs() as f64, 0.0);
            Artifact::Spectrum { spectrum, diagnostics }
        }
        Command::Soliton(c) => {
            let spec = DiscreteSpectrum::new(c.poles.clone(), c.norming.clone())?;
            let ys: Vec<f64> = (0..c.n).map(|k| c.y_range.0 + (c.y_range.1 - c.y_range.0) * k as f64 / (c.n - 1) as f64).collect();
            let pts: Vec<(f64, f64)> = c.times.iter().flat_map(|&t| ys.iter().map(move |&y| (y, t))).collect();
            let samples: Vec<ParametricSample> =
                upstream(pts.par_iter().map(|&(y, t)| soliton_sample(&spec, y, t)).collect::<Result<_>>(), "soliton reconstruction")?;
            let imag = samples.iter().map(|s| s.imag_residual / s.mu1_mu2_at_0.abs().max(1.0)).fold(0.0, f64::max);
            ck.at_most("imaginary_residual", imag, 1e-8);
            let sym = samples.iter().filter(|s| !s.cusp).map(|s| s.mu_ratio_err).fold(0.0, f64::max);
            ck.at_most("mu_symmetry", sym, 1e-8);
            Artifact::SolitonField { samples }
        }
        Command::Asymptote(c) => {
            let (spec, data) = upstream(c.scenario.scattering(&ScatterOptions::default()), "scattering the datum")?;
            let refl = Reflection::from_data(&data);
            let pts: Vec<(f64, f64)> = c.times.iter().flat_map(|&t| c.cone.slice(t, c.slice.0, c.slice.1).into_iter().map(move |y| (y, t))).collect();
            let samples: Vec<AsymptoticSample> = upstream(
                pts.par_iter().map(|&(y, t)| asymptotic_solution(&spec, &refl, &c.cone, y, t, &c.options)).collect::<Result<_>>(),
                "asymptotic formula",
            )?;
            let finite = samples.iter().filter(|s| !(s.q_asy.is_finite() && s.x_asy.is_finite())).count();
            ck.at_most("non_finite_samples", finite as f64, 0.0);
            ck.notes.insert("q_reading".into(), reading_name(c.options.reading).into());
            Artifact::Asymptote { samples }
        }
        Command::Evolve(c) => {
            let trajectory = match &c.source {
                EvolveSource::Profile(p) => {
                    let prof = upstream(p.build(), "building the profile")?;
                    upstream(evolve(&prof, &c.times, &c.solver), "direct evolution")?
                }
                EvolveSource::SolitonBump(s) => upstream(s.evolve(&c.times, &c.solver), "direct evolution")?,
            };
            ck.at_most("c_drift_per_unit_time", trajectory.c_drift_rate(), c.drift_tol);
            Artifact::Evolution { trajectory }
        }
        Command::Compare(c) => {
            let (spec, data) = upstream(c.scenario.scattering(&ScatterOptions::default()), "scattering the datum")?;
            let refl = Reflection::from_data(&data);
            let traj = upstream(c.scenario.evolve(&c.times, &c.solver), "direct evolution")?;
            let comparisons = upstream(compare_on_cone(&spec, &refl, &c.cone, &traj, c.slice, &c.options), "cone comparison")?;
            let fit = comparisons.iter().find(|k| k.t == c.fit_time).map(|k| k.sup_err * k.t.sqrt()).unwrap_or(f64::INFINITY);
            ck.tolerances.insert("sup_error_floor".into(), c.tolerance);
            ck.tolerances.insert("fitted_c".into(), fit);
            for k in &comparisons {
                let tol = c.tolerance.max(fit / k.t.sqrt());
                ck.at_most(&format!("sup_error_t{}", k.t), k.sup_err, tol);
            }
            let reading = c.options.reading;
            let passing = comparisons.iter().all(|k| k.sup_err <= c.tolerance.max(fit / k.t.sqrt()));
            ck.notes.insert("q_reading".into(), reading_name(reading).into());
            ck.notes.insert("q_reading_passes".into(), passing.to_string());
            Artifact::ConeComparison { comparisons, reading }
        }
        Command::Signature(c) => {
            let geometry = upstream(phase_signature(c.y, c.t, c.re_range, c.im_range, c.n_re, c.n_im), "signature table")?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut worst = 0.0f64;
            for _ in 0..c.random_points {
                let z = C64::new(rng.gen_range(c.re_range.0..c.re_range.1), rng.gen_range(c.im_range.0..c.im_range.1));
                let a = re_2i_theta(z, geometry.lambda0);
                let b = re_2i_theta_direct(z, geometry.lambda0);
                worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1.0));
            }
            ck.at_most("formula_vs_direct", worst, c.agreement_tol);
            ck.at_most("locus_mismatches", geometry.locus_mismatches() as f64, 0.0);
            Artifact::Signature { geometry }
        }
    };
    Ok((art, ck))
}

pub fn reading_name(r: QReading) -> &'static str {
    match r {
        QReading::OuterOnly => "outer_only",
        QReading::WithSolitonTerm => "with_soliton_term",
    }
}

/// Validate, compute, and write config.json, artifact.json, the CSV and
/// manifest.json into `out`.
pub fn run_command(cfg: &RunConfig, out: &Path, seed: u64) -> Result<RunOutcome> {
    cfg.validate()?;
    let (artifact, ck) = compute(cfg, seed)?;
    fs::create_dir_all(out)?;
    fs::write(out.join("config.json"), cfg.canonical_json())?;
    let art_json = serde_json::to_string(&artifact).map_err(|e| DymError::Io(e.to_string()))?;
    fs::write(out.join("artifact.json"), art_json)?;
    let csv = emit_plot_data(&artifact, out)?;
    let passed = ck.invariants.iter().all(|i| i.pass);
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        crate_version: env!("CARGO_PKG_VERSION").into(),
        command: cfg.command.name().into(),
        config_hash: cfg.config_hash(),
        seed,
        tolerances: ck.tolerances,
        invariants: ck.invariants,
        notes: ck.notes,
        artifacts: vec![
            "config.json".into(),
            "artifact.json".into(),
            csv.file_name().unwrap().to_string_lossy().into_owned(),
            "manifest.json".into(),
        ],
        passed,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| DymError::Io(e.to_string()))?;
    fs::write(out.join("manifest.json"), text)?;
    Ok(RunOutcome { artifact, manifest })
}
