//! Pseudo-spectral simulation and verification toolkit for the KP-I equation
//! `(u_t + u_xxx + u u_x)_x - u_yy = 0` posed around non-localized traveling
//! waves (the KdV line soliton and the Zaitsev wave).
//!
//! The crate is organized bottom-up:
//!
//! * [`spectral`]: periodic grid, Fourier pair and multiplier operators.
//! * [`profiles`]: background traveling waves and their stationary residual.
//! * [`functionals`]: norms, conserved functionals and inequality probes.
//! * [`solver`]: exponential integrators for the perturbation equation.
//! * [`dispersion`]: free-group kernel, decay fits and Strichartz probes.
//! * [`harness`]: configuration, snapshots, diagnostics and named experiments.

// `!(x < y)` tests reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dispersion;
pub mod error;
mod fft;
pub mod functionals;
pub mod harness;
pub mod initial;
pub mod par;
pub mod profiles;
pub mod rng;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use functionals::FunctionalReport;
pub use profiles::BackgroundSpec;
pub use solver::{Scheme, SimState, SolverConfig};
pub use spectral::{Axis, FracKind, Grid, RealField, SpectralRep, Wavevector};
