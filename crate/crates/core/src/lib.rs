//! Numerical toolkit for the relativistic fractional Schrödinger equation
//! `(-Δ + m²)^s u = f(u)` on periodic grids.
//!
//! * [`spectral_core`]: grids, fields, Fourier multipliers, norms.
//! * [`bessel_profile`]: the extension profile `Φ_s`, constants, kernel `g_s`.
//! * [`extension_solver`]: the weighted half-space extension and its energies.
//! * [`variational`]: nonlinearities, functionals, fibering maps, ground
//!   states, non-existence certificates, the Sobolev quotient scan.
//! * [`symmetry_tools`]: fixed-point iteration, reflection identities,
//!   radial diagnostics, hypothesis (S).

// `!(x > 0.0)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel_profile;
pub mod config;
pub mod error;
pub mod extension_solver;
pub mod field_io;
pub mod quadrature;
pub mod samples;
pub mod spectral_core;
pub mod symmetry_tools;
pub mod variational;
pub mod verify;

pub use error::{FracError, Result};
pub use spectral_core::{Field, Grid, OperatorParams};
