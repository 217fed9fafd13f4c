//! A laboratory for Fermi–Pasta–Ulam–Tsingou-like chains.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: chain potentials (harmonic, FPUT α/β/γ, Toda), lattice states,
//!   and initial-data constructors (sine waves, mode packets, Gibbs samples).
//! - [`integrate`]: symplectic time stepping (velocity Verlet and the fourth
//!   order Yoshida composition) with snapshot observers and drift monitoring.
//! - [`spectral`]: unitary DFT, normal-mode energies, time averages, spectral
//!   entropy, recurrence detection and power-law fits.
//! - [`toda`]: Hénon integrals, Lax-matrix traces and their drift along
//!   non-integrable flows.
//! - [`continuum`]: fields on the unit torus, the discrete derivative, Riemann
//!   invariants, inviscid Burgers characteristics and shock spectra, and a
//!   pseudospectral KdV/mKdV solver.
//! - [`harness`]: JSON-configured experiments that write CSV data and JSON
//!   summaries; driven by the `fputlab` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod continuum;
pub mod error;
pub mod harness;
pub mod integrate;
pub mod model;
pub mod spectral;
pub mod toda;

pub use error::{Error, Result};
pub use integrate::{IntegratorSpec, Scheme, TrajectoryRecord};
pub use model::{Boundary, InitialData, LatticeState, Potential};
pub use spectral::ModeSpectrum;
