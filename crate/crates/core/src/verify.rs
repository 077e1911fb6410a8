//! The identity suite behind `verify-all`: every row compares a measured
//! residual with a fixed tolerance, optionally divided by a tightening factor.

use serde::Serialize;

use crate::bessel_profile::kernel::kernel_fourier_1d;
use crate::bessel_profile::{
    bessel_potential, c1, compute_profile, k_s, profile_energy, profile_weighted_mass, DEFAULT_MESH_DENSITY,
    DEFAULT_Y_CUT,
};
use crate::error::{FracError, Result};
use crate::extension_solver::{extend, neumann_trace, weighted_energy, weighted_mass, YMesh};
use crate::samples::{random_band_limited, random_bumps};
use crate::spectral_core::{
    apply_multiplier, hs_inner, hs_norm_sq, l2_inner, low_order_mass, lp_norm, Field, Grid, OperatorParams,
};
use crate::symmetry_tools::{
    fixed_point_residual, kernel_antisymmetry_check, reflect_field, reflection_residual, HalfSpace, ReflectionSpec,
};
use crate::variational::{energy, ground_state_solve, nehari_pohozaev_j, Fiber, Nonlinearity, SolverOptions};

#[derive(Debug, Clone, Serialize)]
pub struct VerifyRow {
    pub group: &'static str,
    pub identity: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub params: OperatorParams,
    pub tighten: f64,
    pub seed: u64,
    pub rows: Vec<VerifyRow>,
    pub all_passed: bool,
}

impl VerifyReport {
    /// The first failing row as a tolerance error.
    pub fn first_failure(&self) -> Option<FracError> {
        self.rows.iter().find(|r| !r.passed).map(|r| FracError::Tolerance {
            check: r.identity.to_string(),
            measured: r.measured,
            tolerance: r.tolerance,
        })
    }
}

struct Suite {
    tighten: f64,
    rows: Vec<VerifyRow>,
}

impl Suite {
    fn push(&mut self, group: &'static str, identity: &'static str, measured: f64, tolerance: f64) {
        let tolerance = tolerance / self.tighten;
        self.rows.push(VerifyRow { group, identity, measured, tolerance, passed: measured <= tolerance });
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn rel_l2(a: &Field, b: &Field) -> Result<f64> {
    Ok(lp_norm(&a.axpy(-1.0, b)?, 2.0)? / lp_norm(b, 2.0)?)
}

/// Grid used by the field-level rows for dimension `dim`.
fn suite_grid(dim: usize) -> Result<Grid> {
    match dim {
        1 => Grid::new(1, 128, 8.0),
        2 => Grid::new(2, 32, 6.0),
        _ => Grid::new(3, 16, 6.0),
    }
}

/// Runs every identity at `params`; `tighten ≥ 1` divides all tolerances.
pub fn verify_all(params: &OperatorParams, tighten: f64, seed: u64) -> Result<VerifyReport> {
    if !(tighten.is_finite() && tighten > 0.0) {
        return Err(FracError::config(format!("tighten must be positive, got {tighten}")));
    }
    let s = params.s;
    let mut suite = Suite { tighten, rows: Vec::new() };

    // profile constants
    let ks = k_s(s)?;
    suite.push("profile", "2s·c1 = k_s", rel(2.0 * s * c1(s)?, ks), 1e-13);
    let table = compute_profile(s, DEFAULT_Y_CUT, DEFAULT_MESH_DENSITY)?;
    suite.push("profile", "K(Phi_s) = k_s", rel(profile_energy(&table), ks), 1e-5);
    suite.push("profile", "int Phi_s^2 t^(1-2s) = s k_s", rel(profile_weighted_mass(&table), s * ks), 1e-5);

    // operator
    let grid = suite_grid(params.dim)?;
    let l = grid.length();
    let mut worst: f64 = 0.0;
    for k in [1i64, 3, 7] {
        let wave = Field::from_fn(grid, |x| {
            let arg: f64 = x.iter().enumerate().map(|(a, v)| (k + a as i64) as f64 * v).sum();
            (2.0 * std::f64::consts::PI * arg / l).cos()
        })?;
        let k2: f64 = (0..grid.dim()).map(|a| ((k + a as i64) as f64 / l).powi(2)).sum();
        let expect = wave.scaled(params.symbol(k2).powf(s));
        worst = worst.max(rel_l2(&apply_multiplier(&wave, params, s)?, &expect)?);
    }
    suite.push("operator", "plane-wave eigenvalue", worst, 1e-12);
    let u = random_band_limited(grid, 5, seed)?;
    let v = random_band_limited(grid, 5, seed + 1)?;
    let composed = apply_multiplier(&apply_multiplier(&u, params, 0.3 * s)?, params, 0.7 * s)?;
    suite.push("operator", "semigroup L^a L^b = L^(a+b)", rel_l2(&composed, &apply_multiplier(&u, params, s)?)?, 1e-12);
    let a = l2_inner(&apply_multiplier(&u, params, s)?, &v)?;
    let b = l2_inner(&u, &apply_multiplier(&v, params, s)?)?;
    let scale = hs_norm_sq(&u, params)?.sqrt() * hs_norm_sq(&v, params)?.sqrt();
    suite.push("operator", "symmetry <L u, v> = <u, L v>", (a - b).abs() / scale, 1e-12);
    let uv = hs_inner(&u, &v, params)?;
    let vu = hs_inner(&v, &u, params)?;
    suite.push("operator", "hs_inner symmetric", (uv - vu).abs() / scale, 1e-12);

    // kernel
    let line = OperatorParams::new(1, s, params.m)?;
    let mut worst: f64 = 0.0;
    for xi in [0.0, 0.1, 0.3, 0.7, 1.5] {
        worst = worst.max(rel(kernel_fourier_1d(xi, &line)?, line.symbol(xi * xi).powf(-s)));
    }
    suite.push("kernel", "g_s^ = (m^2+4pi^2 xi^2)^-s", worst, 1e-4);
    let chained = bessel_potential(&bessel_potential(&u, params, 0.3)?, params, 0.4)?;
    suite.push("kernel", "I_0.3 I_0.4 = I_0.7", rel_l2(&chained, &bessel_potential(&u, params, 0.7)?)?, 1e-12);
    let mut excess: f64 = 0.0;
    for k in 0..5 {
        let f = random_bumps(grid, 3, 1.5, false, seed + 10 + k)?;
        let ratio = lp_norm(&bessel_potential(&f, params, s)?, 2.0)? / lp_norm(&f, 2.0)?;
        excess = excess.max(ratio * params.m.powf(2.0 * s) - 1.0);
    }
    suite.push("kernel", "|I_s f|_2 <= m^-2s |f|_2", excess.max(0.0), 1e-12);

    // extension
    let mesh = YMesh::default_for(params);
    let (mut e_err, mut m_err, mut t_err): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for k in 0..3 {
        let f = random_band_limited(grid, 3, seed + 20 + k)?;
        let w = extend(&f, params, &table, &mesh)?;
        e_err = e_err.max(rel(weighted_energy(&w), ks * hs_norm_sq(&f, params)?));
        m_err = m_err.max(rel(weighted_mass(&w), s * ks * low_order_mass(&f, params)?));
        let op = apply_multiplier(&f, params, s)?.scaled(ks);
        t_err = t_err.max(rel_l2(&neumann_trace(&w)?, &op)?);
    }
    suite.push("extension", "weighted energy = k_s ||u||^2", e_err, 1e-4);
    suite.push("extension", "weighted mass = s k_s m^2 |u|_low", m_err, 1e-4);
    suite.push("extension", "Neumann trace = k_s L^s u", t_err, 1e-3);

    // fibering
    let nl = Nonlinearity::Model { c: 2.0 };
    let (mut h_err, mut d_err): (f64, f64) = (0.0, 0.0);
    for k in 0..3 {
        let f = random_bumps(grid, 2, 1.0, true, seed + 30 + k)?;
        let fiber = Fiber::new(&f, params, &nl)?;
        let phi = energy(&f, params, &nl)?;
        let j = nehari_pohozaev_j(&f, params, &nl)?;
        let scale = hs_norm_sq(&f, params)?;
        h_err = h_err.max((fiber.value(1.0)? - phi).abs() / scale);
        d_err = d_err.max((fiber.derivative(1.0)? - j).abs() / scale);
    }
    suite.push("fibering", "h_u(1) = Phi(u)", h_err, 1e-10);
    suite.push("fibering", "h_u'(1) = J(u)", d_err, 1e-10);

    // symmetry
    let refl = ReflectionSpec::new(0, -0.25 * grid.spacing() * (grid.n() / 8) as f64, HalfSpace::Below);
    let back = reflect_field(&reflect_field(&u, &refl)?, &refl)?;
    suite.push("symmetry", "reflection involution", back.axpy(-1.0, &u)?.max_abs(), 0.0);
    let anti = kernel_antisymmetry_check(params, -0.5, 2.0, 20, seed)?;
    suite.push("symmetry", "g_s(x-y) > g_s(x_lambda-y)", anti.violations as f64, 0.0);

    // a computed one-dimensional solution: residuals limited by discretization
    let line_grid = Grid::new(1, 256, 32.0)?;
    let model = Nonlinearity::Model { c: 2.0 * params.m.powf(2.0 * s) };
    let opts = SolverOptions { seed, ..SolverOptions::default() };
    let gs = ground_state_solve(line_grid, &line, &model, &opts)?;
    let sol = gs.field.centered_on_peak();
    suite.push("solution", "Pohozaev P(u*) = 0", gs.pohozaev.relative_residual.abs(), 1e-3);
    suite.push("solution", "u* = I_s f(u*)", fixed_point_residual(&sol, &line, &model)?, 1e-3);
    let lemma = reflection_residual(&sol, &model, &ReflectionSpec::new(0, -2.0, HalfSpace::Below), &line)?;
    suite.push("solution", "reflection identity at u*", lemma.relative_residual, 5e-3);

    let all_passed = suite.rows.iter().all(|r| r.passed);
    Ok(VerifyReport { params: *params, tighten, seed, rows: suite.rows, all_passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_suite_passes_and_tightened_suite_fails() {
        let p = OperatorParams::new(1, 0.25, 1.0).unwrap();
        let r = verify_all(&p, 1.0, 1).unwrap();
        assert!(r.rows.iter().any(|row| row.group == "solution"));
        for row in &r.rows {
            println!("{:10} {:38} {:.3e} <= {:.1e}", row.group, row.identity, row.measured, row.tolerance);
        }
        assert!(r.all_passed);
        let t = verify_all(&p, 1000.0, 1).unwrap();
        assert!(!t.all_passed);
        assert_eq!(t.first_failure().unwrap().exit_code(), 3);
    }
}
