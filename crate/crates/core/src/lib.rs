//! Simulation and verification toolkit for a flexible beam clamped to a
//! rotating disk, stabilised by a nonlinear boundary moment on the beam tip
//! and a nonlinear torque on the disk.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] physical parameters, feedback-law catalog, hypothesis checks.
//! * [`spatial`] cubic Hermite discretisation, banded operators, static and
//!   modal oracles.
//! * [`dynamics`] Newmark time stepping of the beam subsystem and of the
//!   coupled beam/disk system.
//! * [`functionals`] energy, modified energy, multiplier and Lyapunov
//!   functionals, dissipation residuals.
//! * [`decay`] convexity calculus, envelope calibration, rate fits and the
//!   spectral oracle for linear damping.
//! * [`cli`] configuration files, scenario runs, sweeps and output files.

pub mod cli;
pub mod decay;
pub mod dynamics;
pub mod error;
pub mod functionals;
pub mod model;
pub mod spatial;

pub use error::{Error, Result};
