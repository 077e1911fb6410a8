//! The scan `t ↦ v_t = U(t·)` comparing the massive quotient `Λ(v_t)` with
//! the homogeneous Sobolev quotient `S(v_t)`.
//!
//! `v_t` lives on the box `L/t` with spacing `h/t`, so its samples coincide
//! with those of `U` and no resolution is lost as `t` grows.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{FracError, Result};
use crate::spectral_core::{hs_norm_sq, lp_norm, spectral_quadratic, Field, Grid, OperatorParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SobolevRow {
    pub t: f64,
    /// `∫(m²+4π²|ξ|²)^s|v̂_t|² / |v_t|²_{2*}`.
    pub lambda_quotient: f64,
    /// `∫(2π|ξ|)^{2s}|v̂_t|² / |v_t|²_{2*}`.
    pub s_quotient: f64,
    pub excess: f64,
    /// `m^{2s} t^{-2s} |U|₂²`.
    pub bound: f64,
    /// `t^N |v_t|_{2*}^{2*}`; equals 1 for the normalised `U`.
    pub scaling_check: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SobolevScan {
    pub mu: f64,
    pub length: f64,
    pub n: usize,
    pub u_l2_sq: f64,
    pub rows: Vec<SobolevRow>,
    /// Least-squares slope of `ln(excess)` against `ln t` over the largest
    /// decade of the scan.
    pub slope: f64,
    pub slope_target: f64,
    pub slope_relative_error: f64,
    /// Largest relative spread of `S(v_t)` over the scan.
    pub s_spread: f64,
    /// Largest `|t^N |v_t|^{2*} - 1|`.
    pub scaling_error: f64,
    /// `excess ≤ bound` at every row.
    pub bound_holds: bool,
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Runs the scan for `U(x) = c(μ²+|x|²)^{-(N-2s)/2}` sampled on `grid`.
pub fn sobolev_quotient_scan(params: &OperatorParams, mu: f64, t_list: &[f64], grid: Grid) -> Result<SobolevScan> {
    params.check_grid(&grid)?;
    let n_dim = params.dim as f64;
    let s = params.s;
    if !(n_dim > 4.0 * s) {
        return Err(FracError::config(format!(
            "Sobolev scan needs N > 4s so that U ∈ H^s (got N={}, s={s})",
            params.dim
        )));
    }
    if !(mu.is_finite() && mu > 0.0) {
        return Err(FracError::config(format!("mu must be positive, got {mu}")));
    }
    if t_list.is_empty() || t_list.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(FracError::config("t list must be nonempty and positive"));
    }
    if t_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(FracError::config("t list must be strictly increasing"));
    }
    let crit = 2.0 * n_dim / (n_dim - 2.0 * s);
    let raw = Field::from_fn(grid, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        (mu * mu + r2).powf(-0.5 * (n_dim - 2.0 * s))
    })?;
    let u = raw.scaled(1.0 / lp_norm(&raw, crit)?);
    let u_l2_sq = lp_norm(&u, 2.0)?.powi(2);
    let m2s = params.m.powf(2.0 * s);

    let mut rows = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let grid_t = Grid::new(grid.dim(), grid.n(), grid.length() / t)?;
        let v = Field::new(grid_t, u.values().to_vec())?;
        let lp = lp_norm(&v, crit)?;
        let denom = lp * lp;
        let lambda_quotient = hs_norm_sq(&v, params)? / denom;
        let s_quotient = spectral_quadratic(&v, |q| (4.0 * PI * PI * q).powf(s)) / denom;
        rows.push(SobolevRow {
            t,
            lambda_quotient,
            s_quotient,
            excess: lambda_quotient - s_quotient,
            bound: m2s * t.powf(-2.0 * s) * u_l2_sq,
            scaling_check: lp.powf(crit) * t.powf(n_dim),
        });
    }

    let t_top = t_list[t_list.len() - 1];
    let fit: Vec<&SobolevRow> = rows.iter().filter(|r| r.t >= t_top / 10.0 * (1.0 - 1e-12)).collect();
    let slope = if fit.len() >= 2 {
        let lx: Vec<f64> = fit.iter().map(|r| r.t.ln()).collect();
        let ly: Vec<f64> = fit.iter().map(|r| r.excess.ln()).collect();
        fit_slope(&lx, &ly)
    } else {
        f64::NAN
    };
    let slope_target = -2.0 * s;
    let s0 = rows[0].s_quotient;
    let s_spread = rows.iter().map(|r| ((r.s_quotient - s0) / s0).abs()).fold(0.0, f64::max);
    let scaling_error = rows.iter().map(|r| (r.scaling_check - 1.0).abs()).fold(0.0, f64::max);
    let bound_holds = rows.iter().all(|r| r.excess <= r.bound);
    Ok(SobolevScan {
        mu,
        length: grid.length(),
        n: grid.n(),
        u_l2_sq,
        rows,
        slope,
        slope_target,
        slope_relative_error: ((slope - slope_target) / slope_target).abs(),
        s_spread,
        scaling_error,
        bound_holds,
    })
}

/// The scan at fixed spacing `h` on each box length in `lengths`.
pub fn box_convergence_study(
    params: &OperatorParams,
    mu: f64,
    t_list: &[f64],
    spacing: f64,
    lengths: &[f64],
) -> Result<Vec<SobolevScan>> {
    lengths
        .iter()
        .map(|&l| {
            let n = (l / spacing).round() as usize;
            sobolev_quotient_scan(params, mu, t_list, Grid::new(params.dim, n, l)?)
        })
        .collect()
}

/// `n` geometric points on `[t_min, t_max]`.
pub fn geometric_t_list(t_min: f64, t_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max > t_min && steps >= 2) {
        return Err(FracError::config("need 0 < tmin < tmax and steps ≥ 2"));
    }
    Ok((0..steps).map(|i| t_min * (t_max / t_min).powf(i as f64 / (steps - 1) as f64)).collect())
}
