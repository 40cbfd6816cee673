use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DymError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    // profile validation
    #[error("profile tails exceed decay margin: |q0| = {tail:.3e} > {margin:.3e}")]
    NonDecaying { tail: f64, margin: f64 },
    #[error("q0 < -1 at x = {x}")]
    BelowMinusOne { x: f64 },
    #[error("moment {which} = {value:.3e} exceeds tolerance {tol:.3e}")]
    MomentViolation { which: usize, value: f64, tol: f64 },

    // scattering
    #[error("ODE step controller failed at s = {at} (lambda = {lambda})")]
    OdeDivergence { at: f64, lambda: String },
    #[error("unitarity violated: max ||a|^2-|b|^2-1| = {err:.3e} > {tol:.3e}")]
    UnitarityViolation { err: f64, tol: f64 },
    #[error("contour passes within {dist:.3e} of a zero of a")]
    ZeroOnBoundary { dist: f64 },
    #[error("multiple or non-simple zero near {near}")]
    MultipleZero { near: String },
    #[error("argument principle counts {counted} zeros, refinement found {found}")]
    CountMismatch { counted: i64, found: usize },

    // conjugation
    #[error("y/t = {ratio} is not negative")]
    WrongRegime { ratio: f64 },
    #[error("|r(s)| >= 1 at s = {at}")]
    ReflectionAtUnit { at: f64 },
    #[error("lambda = {at} lies on the branch cut without a side")]
    OnBranchCut { at: String },
    #[error("lambda hits the pole {at}")]
    PoleHit { at: String },
    #[error("|lambda_n| = {modulus} is within 1e-8 of lambda0")]
    PartitionBoundary { modulus: f64 },
    #[error("pole {at} lies on the interval")]
    PoleOnInterval { at: String },

    // soliton
    #[error("singular residue system")]
    SingularSystem,
    #[error("residue system condition number {cond:.3e} above threshold")]
    IllConditioned { cond: f64 },
    #[error("mu2(0) degenerate at (y, t) = ({y}, {t})")]
    DegenerateMu { y: f64, t: f64 },
    #[error("fixed point failed to converge, residual {residual:.3e}")]
    NoConvergence { residual: f64 },
    #[error("|lambda_n|^2 = {modulus_sq} is on a cone boundary")]
    BoundaryPole { modulus_sq: f64 },

    // asymptotics
    #[error("negative nu = {nu}")]
    GammaPole { nu: f64 },
    #[error("outer model not invertible at {at}")]
    SingularOuter { at: f64 },
    #[error("(y, t) = ({y}, {t}) is outside the cone")]
    ConePointOutside { y: f64, t: f64 },
    #[error("m5 - m6 vanishes")]
    DegenerateDenominator,

    // direct solver
    #[error("u fell below u_min at t = {t} (min u = {min_u:.3e})")]
    CuspApproach { t: f64, min_u: f64 },
    #[error("solution blew up at t = {t}")]
    BlowupDetected { t: f64 },
    #[error("step size underflow at t = {t}")]
    StepFailure { t: f64 },
    #[error("fields share no common domain")]
    DisjointDomains,

    // cli
    #[error("config invalid: field `{field}`: {msg}")]
    ConfigInvalid { field: String, msg: String },
    #[error("{context}: {source}")]
    Upstream { context: String, source: Box<DymError> },
    #[error("unknown artifact `{0}`")]
    UnknownArtifact(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, DymError>;

impl DymError {
    pub fn context(self, ctx: impl Into<String>) -> DymError {
        DymError::Upstream { context: ctx.into(), source: Box::new(self) }
    }
}

impl From<std::io::Error> for DymError {
    fn from(e: std::io::Error) -> Self {
        DymError::Io(e.to_string())
    }
}
