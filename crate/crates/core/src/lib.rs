//! Simulation core for single-shot optical spin readout of a quantum dot
//! molecule.
//!
//! The crate is organized bottom-up:
//!
//! * [`quantum`] — states and operators on the finite Hilbert space;
//! * [`ode`] — the embedded Dormand-Prince 5(4) integrator;
//! * [`lindblad`] — the master-equation engine with per-channel emission
//!   accounting and a matrix-exponential oracle;
//! * [`model`] — the eight-level molecule: transitions, rates, channels,
//!   Hamiltonians;
//! * [`protocol`] — the two-stage readout protocol and its photon budgets;
//! * [`stats`] — Poisson threshold discrimination and the parameter
//!   optimizations;
//! * [`units`] — the one place where quoted frequencies and lifetimes become
//!   internal angular rates.

pub mod error;
pub mod lindblad;
pub mod model;
pub mod ode;
pub mod protocol;
pub mod quantum;
pub mod stats;
pub mod testkit;
pub mod units;

pub use error::{CoreError, Result};
pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;
