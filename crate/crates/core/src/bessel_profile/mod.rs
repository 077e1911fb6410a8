//! The extension profile `Φ_s`, its constants, and the Bessel kernel `g_s`.
//!
//! `Φ_s` solves `Φ'' + ((1-2s)/y) Φ' - Φ = 0` on `(0,∞)` with `Φ(0) = 1` and
//! decay at infinity; explicitly `Φ_s(y) = 2^{1-s}/Γ(s) · y^s K_s(y)`.

pub mod besselk;
pub mod kernel;
pub mod table;

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{FracError, Result};

pub use besselk::{bessel_k, bessel_k_scaled};
pub use kernel::{bessel_potential, kernel_value, KernelSpec};
pub use table::{
    compute_profile, ode_residual, profile_energy, profile_weighted_mass, OdeResidual, ProfileTable,
    DEFAULT_MESH_DENSITY, DEFAULT_Y_CUT,
};

/// `Γ(x)`.
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

fn check_order(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(FracError::config(format!("s must lie in (0,1), got {s}")));
    }
    Ok(())
}

/// `k_s = 2^{1-2s} Γ(1-s) / Γ(s)`.
pub fn k_s(s: f64) -> Result<f64> {
    check_order(s)?;
    Ok(2f64.powf(1.0 - 2.0 * s) * gamma(1.0 - s) / gamma(s))
}

/// `c₁ = k_s / (2s)`, the coefficient in `Φ_s(y) = 1 - c₁ y^{2s} + o(y^{2s})`.
pub fn c1(s: f64) -> Result<f64> {
    Ok(k_s(s)? / (2.0 * s))
}

/// `c₂ = 2^{(1-s)/2} π^{1/2} / Γ(s/2)`, the customary tail coefficient.
///
/// It does not equal the true large-`y` amplitude of `Φ_s` (at `s = 1/2` the
/// profile is `e^{-y}` while `c₂ ≈ 0.581`); see [`tail_amplitude_exact`].
pub fn c2(s: f64) -> Result<f64> {
    check_order(s)?;
    Ok(2f64.powf(0.5 * (1.0 - s)) * PI.sqrt() / gamma(0.5 * s))
}

/// Leading amplitude `A` of `Φ_s(y) ~ A y^{s-1/2} e^{-y}`:
/// `A = 2^{1/2-s} π^{1/2} / Γ(s)`.
pub fn tail_amplitude_exact(s: f64) -> Result<f64> {
    check_order(s)?;
    Ok(2f64.powf(0.5 - s) * PI.sqrt() / gamma(s))
}

/// The scalar constants attached to a fractional order.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProfileConstants {
    pub s: f64,
    pub k_s: f64,
    pub c1: f64,
    pub c2: f64,
    pub tail_amplitude: f64,
}

impl ProfileConstants {
    pub fn new(s: f64) -> Result<Self> {
        Ok(ProfileConstants { s, k_s: k_s(s)?, c1: c1(s)?, c2: c2(s)?, tail_amplitude: tail_amplitude_exact(s)? })
    }
}

/// `Φ_s(y)` and `Φ_s'(y)` by direct quadrature (no table).
pub fn profile_direct(s: f64, y: f64) -> Result<(f64, f64)> {
    check_order(s)?;
    if y == 0.0 {
        return Ok((1.0, f64::NEG_INFINITY));
    }
    let norm = 2f64.powf(1.0 - s) / gamma(s);
    let lead = norm * y.powf(s) * (-y).exp();
    // d/dy [y^s K_s(y)] = -y^s K_{1-s}(y)
    let phi = lead * bessel_k_scaled(s, y)?;
    let dphi = -lead * bessel_k_scaled(1.0 - s, y)?;
    Ok((phi, dphi))
}
