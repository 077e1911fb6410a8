//! Energy `Φ`, its gradient, the Nehari and Pohozaev functionals, and `J`.
//!
//! With `‖u‖² = ∫(m²+4π²|ξ|²)^s|û|²` and `low(u) = ∫|û|²/(m²+4π²|ξ|²)^{1-s}`:
//!
//! * `Φ(u) = ‖u‖²/2 - ∫F(u)`
//! * `Φ'(u)·u = ‖u‖² - ∫f(u)u`
//! * `P(u) = (N-2s)/2 ‖u‖² + s m² low(u) - N∫F(u)`
//! * `J(u) = Φ'(u)·u + 2P(u)`

use serde::Serialize;

use crate::error::{FracError, Result};
use crate::spectral_core::{apply_multiplier, hs_norm_sq, low_order_mass, Field, OperatorParams};
use crate::variational::nonlinearity::Nonlinearity;

/// Tolerance on the composed vs expanded forms of `J`, relative to the
/// largest term; a larger gap is an internal fault.
pub const J_CONSISTENCY_TOL: f64 = 1e-8;

/// `∫F(u)` by the grid rule.
pub fn potential_integral(u: &Field, nl: &Nonlinearity) -> f64 {
    u.grid().cell_volume() * u.values().iter().map(|&v| nl.primitive(v)).sum::<f64>()
}

/// `∫f(u)u` by the grid rule.
pub fn nonlinear_work(u: &Field, nl: &Nonlinearity) -> f64 {
    u.grid().cell_volume() * u.values().iter().map(|&v| nl.f(v) * v).sum::<f64>()
}

/// `Φ(u) = ‖u‖²/2 - ∫F(u)`.
pub fn energy(u: &Field, params: &OperatorParams, nl: &Nonlinearity) -> Result<f64> {
    Ok(0.5 * hs_norm_sq(u, params)? - potential_integral(u, nl))
}

/// Weak-form residual `(-Δ+m²)^s u - f(u)`, so that
/// `Φ'(u)·v = ⟨euler_gradient(u), v⟩_{L²}` for band-limited `v`.
pub fn euler_gradient(u: &Field, params: &OperatorParams, nl: &Nonlinearity) -> Result<Field> {
    let lu = apply_multiplier(u, params, params.s)?;
    let values = lu.values().iter().zip(u.values()).map(|(a, &b)| a - nl.f(b)).collect();
    Field::new(*u.grid(), values)
}

/// `Φ'(u)·u = ‖u‖² - ∫f(u)u`.
pub fn nehari_defect(u: &Field, params: &OperatorParams, nl: &Nonlinearity) -> Result<f64> {
    Ok(hs_norm_sq(u, params)? - nonlinear_work(u, nl))
}

/// Terms of a Pohozaev-type identity `lhs_gradient + lhs_low_order = rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PohozaevReport {
    pub lhs_gradient_term: f64,
    pub lhs_low_order_term: f64,
    pub rhs_potential_term: f64,
    pub residual: f64,
    pub relative_residual: f64,
}

impl PohozaevReport {
    /// Residual and relative residual (normalized by `max(|lhs|, |rhs|)`, zero
    /// when both vanish) computed from the three terms.
    pub fn from_terms(lhs_gradient_term: f64, lhs_low_order_term: f64, rhs_potential_term: f64) -> Self {
        let lhs = lhs_gradient_term + lhs_low_order_term;
        let residual = lhs - rhs_potential_term;
        let scale = lhs.abs().max(rhs_potential_term.abs());
        let relative_residual = if scale > 0.0 { residual / scale } else { 0.0 };
        PohozaevReport { lhs_gradient_term, lhs_low_order_term, rhs_potential_term, residual, relative_residual }
    }

    pub fn lhs(&self) -> f64 {
        self.lhs_gradient_term + self.lhs_low_order_term
    }
}

/// `P(u)` split into `(N-2s)/2 ‖u‖²`, `s m² low(u)` and `N∫F(u)`.
pub fn pohozaev_p(u: &Field, params: &OperatorParams, nl: &Nonlinearity) -> Result<PohozaevReport> {
    let n = params.dim as f64;
    let s = params.s;
    let grad = 0.5 * (n - 2.0 * s) * hs_norm_sq(u, params)?;
    let low = s * params.m * params.m * low_order_mass(u, params)?;
    let rhs = n * potential_integral(u, nl);
    Ok(PohozaevReport::from_terms(grad, low, rhs))
}

/// `J(u)`, returned in the expanded form
/// `(N+1-2s)‖u‖² + 2s m² low(u) - 2N∫F(u) - ∫f(u)u`.
///
/// Errors when the composed form `Φ'(u)·u + 2P(u)` disagrees beyond
/// [`J_CONSISTENCY_TOL`].
pub fn nehari_pohozaev_j(u: &Field, params: &OperatorParams, nl: &Nonlinearity) -> Result<f64> {
    let n = params.dim as f64;
    let s = params.s;
    let m2 = params.m * params.m;
    // one spectral pass over the combined weight
    let quad = crate::spectral_core::spectral_quadratic(u, |q| {
        let w = params.symbol(q);
        (n + 1.0 - 2.0 * s) * w.powf(s) + 2.0 * s * m2 * w.powf(s - 1.0)
    });
    let pot = potential_integral(u, nl);
    let work = nonlinear_work(u, nl);
    let expanded = quad - 2.0 * n * pot - work;

    let poho = pohozaev_p(u, params, nl)?;
    let composed = nehari_defect(u, params, nl)? + 2.0 * poho.residual;
    let scale = quad.abs().max(2.0 * n * pot.abs()).max(work.abs());
    if (expanded - composed).abs() > J_CONSISTENCY_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(FracError::Tolerance {
            check: "J composed vs expanded form".into(),
            measured: (expanded - composed).abs() / scale,
            tolerance: J_CONSISTENCY_TOL,
        });
    }
    Ok(expanded)
}

/// `Φ(u) - J(u)/(2N+2)` in closed form:
/// `2s/(2N+2) ∫4π²|ξ|²|û|²/(m²+4π²|ξ|²)^{1-s} + 1/(2N+2) ∫[f(u)u - 2F(u)]`.
pub fn energy_gap(u: &Field, params: &OperatorParams, nl: &Nonlinearity) -> Result<f64> {
    params.check_grid(u.grid())?;
    let n = params.dim as f64;
    let s = params.s;
    let kinetic = crate::spectral_core::spectral_quadratic(u, |q| {
        let a = 4.0 * std::f64::consts::PI * std::f64::consts::PI * q;
        a * params.symbol(q).powf(s - 1.0)
    });
    let excess = nonlinear_work(u, nl) - 2.0 * potential_integral(u, nl);
    Ok((2.0 * s * kinetic + excess) / (2.0 * n + 2.0))
}
