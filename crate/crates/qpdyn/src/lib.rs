//! Simulation and calibration toolkit for non-equilibrium
//! quasiparticle dynamics on a hybrid superconducting chip, where a
//! pulse-driven digital converter and a transmon qubit share a
//! substrate.
//!
//! The crate covers the full chain from raw measurements to model
//! parameters:
//!
//! * [`observables`]: qubit relaxation fits, conversion between decay
//!   rate and normalized quasiparticle density, measurement-window
//!   averaging, propagation-timescale estimates, converter voltage
//!   checks.
//! * [`diffusion`]: explicit finite-difference solver for 2D
//!   quasiparticle diffusion with recombination, trapping, and pulsed
//!   injection.
//! * [`phonon`]: closed-form source density and quadrature-based qubit
//!   density for the phonon-mediated injection model, with independent
//!   ODE oracles.
//! * [`calibrate`]: bounded Nelder-Mead fits of the phonon model to
//!   extracted density data, plus synthetic data generation.
//! * [`config`], [`csvio`], [`manifest`]: JSON scenario files, CSV
//!   input/output, and run manifests used by the `qpdyn` binary.

pub mod calibrate;
pub mod config;
pub mod csvio;
pub mod diffusion;
pub mod error;
mod linalg;
pub mod manifest;
pub mod observables;
pub mod params;
pub mod phonon;

pub use error::{QpError, Result};
