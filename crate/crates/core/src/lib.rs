//! Cubic nonlinear Schrödinger dynamics on rational and irrational 2D tori.
//!
//! The crate covers three layers:
//!
//! * [`lattice`] and [`resonance`]: mode arithmetic, exact integer resonance
//!   tests, quasi-resonant quartet enumeration, kinematic level sets and the
//!   finite-precision audit of a floating-point aspect ratio.
//! * [`solver`] and [`truncated`]: a dealiased pseudospectral integrator for
//!   the full equation and a table-driven integrator for the quasi-resonant
//!   truncation.
//! * [`diagnostics`] and [`io`]: Sobolev norms, tails, thresholds, spectra,
//!   ensemble statistics and the on-disk formats.

pub mod diagnostics;
pub mod error;
pub mod io;
pub mod lattice;
pub mod resonance;
pub mod solver;
pub mod truncated;

pub use error::{Error, Result};
pub use lattice::{ModeIndex, SobolevIndex, TorusKind, TorusSpec};

/// Fundamental period `T_f = 2π`.
pub const FUNDAMENTAL_PERIOD: f64 = 2.0 * std::f64::consts::PI;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
