//! Numerical laboratory for the Harry Dym equation
//! (u²)_t = 2 (1/u)_xxx, q = u² − 1: forward scattering, reflectionless
//! solitons, the long-time asymptotic formula, and an independent direct solver.

pub mod error;
pub mod gamma;
pub mod linalg;
pub mod ode;
pub mod profile;
pub mod quad;
pub mod scattering;
pub mod spline;

pub use error::{DymError, Result};
pub use linalg::{Mat2, C64};
pub mod soliton;
pub mod spectrum;
pub mod conjugation;
pub mod asymptotics;
pub mod direct;
pub mod scenario;
pub mod cli;
