//! Simulation laboratory for the finite-volume discrete Anderson model.
//!
//! The crate builds random lattice Hamiltonians H = -Δ + V_ω on the torus
//! [-L,L]^d, computes spectra and eigenvectors with its own dense and
//! banded symmetric solvers, calibrates the integrated density of states by
//! disorder averaging, and runs calibrated statistical tests of the limit
//! laws expected in the localized regime: Poisson local level statistics,
//! independence of the local processes at distinct energies, exponential
//! level-spacing laws (locally e^-x, macroscopically a density-of-states
//! mixture), concentration of eigenvalue counts, and Poisson behavior of
//! the joint (energy, localization-center) process and of the
//! localization-center spacings.
//!
//! Start from the `examples/` directory: each example is a small runnable
//! experiment exercising one capability. The `anderson` binary exposes the
//! same experiments as subcommands driven by JSON configs.

pub mod centers;
pub mod dos;
pub mod eig;
pub mod error;
pub mod harness;
pub mod model;
pub mod pointproc;
pub mod spacings;
pub mod stats;

pub use error::{Error, Result};
