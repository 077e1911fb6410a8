//! Certificate that `(-Δ+m²)^s u = |u|^{p-2}u` has no nontrivial grid
//! solution for `p ≥ 2*_s`.
//!
//! For `f = |u|^{p-2}u`, the Pohozaev defect splits as
//! `(N-2s)/2 · nehari + gap` with `nehari = ‖u‖² - |u|_p^p` and
//! `gap = s m² low(u) - D |u|_p^p`, `D = N/p - (N-2s)/2`. When `p ≥ 2*_s`,
//! `D ≤ 0` and `gap ≥ s m² low(u) > 0`, so any field whose Nehari defect is
//! below `2 s m² low(u)/(N-2s)` in magnitude has a strictly positive
//! Pohozaev defect: both identities cannot hold at once.

use serde::Serialize;

use crate::error::{FracError, Result};
use crate::spectral_core::{hs_norm_sq, low_order_mass, lp_norm, Field, OperatorParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonexistenceReport {
    pub p: f64,
    pub critical_exponent: f64,
    /// `D = N/p - (N-2s)/2`.
    pub d: f64,
    /// `‖u‖² - |u|_p^p`.
    pub nehari_defect: f64,
    /// `|u|_p^p`.
    pub lp_power: f64,
    /// `s m² low(u)`.
    pub low_order_term: f64,
    /// `s m² low(u) - D |u|_p^p`.
    pub gap: f64,
    /// `2 s m² low(u) / (N-2s)`.
    pub nehari_bound: f64,
    /// `(N-2s)/2 · nehari + gap`.
    pub pohozaev_defect: f64,
    pub certified: bool,
}

/// Evaluates the certificate for `u` and the pure power `p`.
pub fn nonexistence_certificate(u: &Field, params: &OperatorParams, p: f64) -> Result<NonexistenceReport> {
    let crit = params.critical_exponent().ok_or_else(|| {
        FracError::config(format!(
            "non-existence certificate needs N > 2s (got N={}, s={}); 2*_s is undefined",
            params.dim, params.s
        ))
    })?;
    if !(p.is_finite() && p >= 2.0) {
        return Err(FracError::domain(format!("exponent p must be ≥ 2, got {p}")));
    }
    if u.max_abs() == 0.0 {
        return Err(FracError::domain("certificate needs u ≠ 0"));
    }
    let n = params.dim as f64;
    let s = params.s;
    let d = n / p - 0.5 * (n - 2.0 * s);
    let norm = hs_norm_sq(u, params)?;
    let lp_power = lp_norm(u, p)?.powf(p);
    let low_order_term = s * params.m * params.m * low_order_mass(u, params)?;
    let nehari_defect = norm - lp_power;
    let gap = low_order_term - d * lp_power;
    let nehari_bound = 2.0 * low_order_term / (n - 2.0 * s);
    let pohozaev_defect = 0.5 * (n - 2.0 * s) * nehari_defect + gap;
    // p within rounding of 2*_s counts as critical
    let supercritical = p >= crit * (1.0 - 1e-14);
    Ok(NonexistenceReport {
        p,
        critical_exponent: crit,
        d,
        nehari_defect,
        lp_power,
        low_order_term,
        gap,
        nehari_bound,
        pohozaev_defect,
        certified: supercritical && gap > 0.0 && nehari_defect.abs() < nehari_bound,
    })
}

/// `λu` with `λ^{p-2} = ‖u‖²/|u|_p^p`, the unique positive multiple of `u`
/// with vanishing Nehari defect for the pure power `p > 2`.
pub fn nehari_rescale(u: &Field, params: &OperatorParams, p: f64) -> Result<Field> {
    if !(p > 2.0) {
        return Err(FracError::domain(format!("Nehari rescaling needs p > 2, got {p}")));
    }
    let norm = hs_norm_sq(u, params)?;
    let lp = lp_norm(u, p)?.powf(p);
    if lp == 0.0 {
        return Err(FracError::domain("Nehari rescaling needs u ≠ 0"));
    }
    Ok(u.scaled((norm / lp).powf(1.0 / (p - 2.0))))
}
