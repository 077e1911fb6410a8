//! The fibering map `h_u(t) = Φ(u_t)` along the dilation `u_t(x) = t u(x/t²)`,
//! its unique critical point `t_u`, and the projection `u ↦ u_{t_u}` onto the
//! Nehari–Pohozaev manifold `{J = 0}`.
//!
//! Spectrally `‖u_t‖² = t^{2N+2-4s} ∫(t⁴m² + 4π²|ξ|²)^s |û|²`, so neither
//! `h_u` nor `h'_u` needs the dilated field itself.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{FracError, Result};
use crate::spectral_core::{Field, Grid, OperatorParams};
use crate::variational::nonlinearity::Nonlinearity;

/// Search interval for `t_u`.
pub const T_SEARCH: (f64, f64) = (1e-4, 1e4);
/// Scan nodes per decade for the uniqueness check.
pub const SCAN_PER_DECADE: usize = 8;
/// Largest admissible fraction of `L²` mass lost by a dilation.
pub const ALIAS_TOL: f64 = 1e-8;

/// Outcome of [`find_t_u`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiberingResult {
    pub t_u: f64,
    pub h_at_t: f64,
    /// `h'_u(t_lo) > 0 ≥ h'_u(t_hi)` and `t_hi = 2 t_lo` before bisection.
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// Sign changes of `h'_u` seen on the scan of [`T_SEARCH`]; exactly 1.
    pub scan_sign_changes: usize,
}

/// Precomputed spectral data of one field for repeated fibering evaluations.
pub struct Fiber<'a> {
    params: OperatorParams,
    nl: Nonlinearity,
    /// `(4π²|ξ_k|², L^{-N}|û_k|²)` over modes with nonzero coefficient.
    modes: Vec<(f64, f64)>,
    values: &'a [f64],
    cell: f64,
}

impl<'a> Fiber<'a> {
    pub fn new(u: &'a Field, params: &OperatorParams, nl: &Nonlinearity) -> Result<Self> {
        params.check_grid(u.grid())?;
        let grid = u.grid();
        let vol = grid.volume();
        let modes = u
            .spectral()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(k, c)| (4.0 * PI * PI * grid.frequency_sq(k), c.norm_sqr() / vol))
            .collect();
        Ok(Fiber { params: *params, nl: *nl, modes, values: u.values(), cell: grid.cell_volume() })
    }

    fn check_t(t: f64) -> Result<()> {
        if !(t.is_finite() && t > 0.0) {
            return Err(FracError::domain(format!("fibering parameter t must be positive, got {t}")));
        }
        Ok(())
    }

    /// `(Σ(t⁴m²+a)^s p, Σ p/(t⁴m²+a)^{1-s})`.
    fn spectral_sums(&self, t: f64) -> (f64, f64) {
        let s = self.params.s;
        let b = t.powi(4) * self.params.m * self.params.m;
        let mut upper = 0.0;
        let mut lower = 0.0;
        for &(a, p) in &self.modes {
            let w = b + a;
            let ws = w.powf(s);
            upper += ws * p;
            lower += ws / w * p;
        }
        (upper, lower)
    }

    /// `(∫F(tu), ∫f(tu)u)`.
    fn potential_sums(&self, t: f64) -> (f64, f64) {
        let mut pot = 0.0;
        let mut work = 0.0;
        for &v in self.values {
            // F(0) = f(0) = 0, so empty nodes contribute nothing
            if v == 0.0 {
                continue;
            }
            pot += self.nl.primitive(t * v);
            work += self.nl.f(t * v) * v;
        }
        (self.cell * pot, self.cell * work)
    }

    /// `h_u(t) = ½ t^{2N+2-4s} ∫(t⁴m²+4π²|ξ|²)^s|û|² - t^{2N} ∫F(tu)`.
    pub fn value(&self, t: f64) -> Result<f64> {
        Self::check_t(t)?;
        let n = self.params.dim as f64;
        let s = self.params.s;
        let (upper, _) = self.spectral_sums(t);
        let (pot, _) = self.potential_sums(t);
        Ok(0.5 * t.powf(2.0 * n + 2.0 - 4.0 * s) * upper - t.powf(2.0 * n) * pot)
    }

    /// `h'_u(t)` split into the quadratic part and the nonlinear part, so
    /// that `h'_u = quadratic - nonlinear`.
    pub fn derivative_parts(&self, t: f64) -> Result<(f64, f64)> {
        Self::check_t(t)?;
        let n = self.params.dim as f64;
        let s = self.params.s;
        let m2 = self.params.m * self.params.m;
        let (upper, lower) = self.spectral_sums(t);
        let (pot, work) = self.potential_sums(t);
        let quadratic = (n + 1.0 - 2.0 * s) * t.powf(2.0 * n + 1.0 - 4.0 * s) * upper
            + 2.0 * s * m2 * t.powf(2.0 * n + 5.0 - 4.0 * s) * lower;
        let nonlinear = 2.0 * n * t.powf(2.0 * n - 1.0) * pot + t.powf(2.0 * n) * work;
        Ok((quadratic, nonlinear))
    }

    /// `h'_u(t)`.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        let (q, nl) = self.derivative_parts(t)?;
        Ok(q - nl)
    }

    /// Number of sign changes of `h'_u` on geometric nodes of `[t_lo, t_hi]`.
    pub fn sign_changes(&self, t_lo: f64, t_hi: f64, per_decade: usize) -> Result<usize> {
        let decades = (t_hi / t_lo).log10();
        let nodes = ((decades * per_decade as f64).ceil() as usize).max(1);
        let mut changes = 0;
        let mut prev = self.derivative(t_lo)? > 0.0;
        for i in 1..=nodes {
            let t = t_lo * (t_hi / t_lo).powf(i as f64 / nodes as f64);
            let cur = self.derivative(t)? > 0.0;
            if cur != prev {
                changes += 1;
            }
            prev = cur;
        }
        Ok(changes)
    }
}

/// `h_u(t)`.
pub fn fibering_value(u: &Field, t: f64, params: &OperatorParams, nl: &Nonlinearity) -> Result<f64> {
    Fiber::new(u, params, nl)?.value(t)
}

/// `h'_u(t)`.
pub fn fibering_derivative(u: &Field, t: f64, params: &OperatorParams, nl: &Nonlinearity) -> Result<f64> {
    Fiber::new(u, params, nl)?.derivative(t)
}

/// Unique `t_u > 0` with `h'_u(t_u) = 0`.
///
/// Brackets by doubling or halving from `t = 1`, then bisects in `ln t` to
/// machine precision. Uniqueness is checked by a sign scan of [`T_SEARCH`].
pub fn find_t_u(u: &Field, params: &OperatorParams, nl: &Nonlinearity) -> Result<FiberingResult> {
    if u.max_abs() == 0.0 {
        return Err(FracError::domain("fibering map is undefined for u = 0"));
    }
    let fiber = Fiber::new(u, params, nl)?;
    let (t_min, t_max) = T_SEARCH;
    let no_root = || {
        FracError::domain(format!(
            "h'_u has no sign change in [{t_min:e}, {t_max:e}]; the nonlinearity violates \
             the fibering hypotheses for this field"
        ))
    };
    let (mut lo, mut hi);
    if fiber.derivative(1.0)? > 0.0 {
        hi = 2.0;
        while fiber.derivative(hi)? > 0.0 {
            hi *= 2.0;
            if hi > t_max {
                return Err(no_root());
            }
        }
        lo = 0.5 * hi;
    } else {
        lo = 0.5;
        while fiber.derivative(lo)? <= 0.0 {
            lo *= 0.5;
            if lo < t_min {
                return Err(no_root());
            }
        }
        hi = 2.0 * lo;
    }
    let bracket = (lo, hi);
    let mut iterations = 0;
    while hi / lo - 1.0 > 4.0 * f64::EPSILON && iterations < 200 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if fiber.derivative(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let t_u = (lo * hi).sqrt();
    let scan_sign_changes = fiber.sign_changes(t_min, t_max, SCAN_PER_DECADE)?;
    if scan_sign_changes != 1 {
        return Err(FracError::domain(format!(
            "h'_u changes sign {scan_sign_changes} times on [{t_min:e}, {t_max:e}]; t_u is not unique"
        )));
    }
    Ok(FiberingResult { t_u, h_at_t: fiber.value(t_u)?, bracket, iterations, scan_sign_changes })
}

/// Applies `mat` (row-major `n×n`) along one axis of row-major complex data.
fn apply_axis(grid: &Grid, data: &mut [Complex64], axis: usize, mat: &[Complex64]) {
    let n = grid.n();
    let stride = n.pow((grid.dim() - 1 - axis) as u32);
    let block = stride * n;
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for base in (0..data.len()).step_by(block) {
        for offset in 0..stride {
            let start = base + offset;
            for (i, v) in line.iter_mut().enumerate() {
                *v = data[start + i * stride];
            }
            for k in 0..n {
                let row = &mat[k * n..(k + 1) * n];
                data[start + k * stride] = row.iter().zip(&line).map(|(a, b)| a * b).sum();
            }
        }
    }
}

/// Fraction of the `L²` mass of `u` that the dilation by `t` would lose:
/// spatial wrap-around for `t > 1`, spectral truncation for `t < 1`.
pub fn dilation_loss(u: &Field, t: f64) -> f64 {
    let grid = u.grid();
    let dim = grid.dim();
    if t > 1.0 {
        let half = 0.5 * grid.length() / (t * t);
        let (mut lost, mut total) = (0.0, 0.0);
        for (j, &v) in u.values().iter().enumerate() {
            let x = grid.point(j);
            let w = v * v;
            total += w;
            if x[..dim].iter().any(|c| c.abs() > half) {
                lost += w;
            }
        }
        if total > 0.0 {
            lost / total
        } else {
            0.0
        }
    } else if t < 1.0 {
        let cut = t * t * grid.nyquist();
        let (mut lost, mut total) = (0.0, 0.0);
        for (k, c) in u.spectral().iter().enumerate() {
            let xi = grid.frequency(k);
            let w = c.norm_sqr();
            total += w;
            if xi[..dim].iter().any(|v| v.abs() > cut) {
                lost += w;
            }
        }
        if total > 0.0 {
            lost / total
        } else {
            0.0
        }
    } else {
        0.0
    }
}

/// The dilation `u_t(x) = t u(x/t²)`, realised spectrally as
/// `û_t(ξ) = t^{2N+1} û(t²ξ)`.
///
/// `û` is evaluated off the frequency lattice by the grid Fourier sum
/// `h^N Σ_x u(x) e^{-2πi x·η}` (trigonometric interpolation of the spectrum),
/// and set to zero beyond the Nyquist frequency.
pub fn dilate(u: &Field, t: f64) -> Result<Field> {
    if !(t.is_finite() && t > 0.0) {
        return Err(FracError::domain(format!("dilation factor must be positive, got {t}")));
    }
    let loss = dilation_loss(u, t);
    if loss > ALIAS_TOL {
        let advice = if t > 1.0 { "enlarge the box length L" } else { "refine the grid (increase n)" };
        return Err(FracError::domain(format!("dilation by t = {t} would alias {loss:.2e} of the L² mass; {advice}")));
    }
    let grid = *u.grid();
    let n = grid.n();
    let h = grid.spacing();
    let nyq = grid.nyquist() * (1.0 + 1e-12);
    let t2 = t * t;
    let mut mat = vec![Complex64::new(0.0, 0.0); n * n];
    for k in 0..n {
        let eta = t2 * grid.freq_index(k) as f64 / grid.length();
        if eta.abs() > nyq {
            continue;
        }
        for j in 0..n {
            let phase = -2.0 * PI * grid.coord(j) * eta;
            mat[k * n + j] = Complex64::from_polar(h, phase);
        }
    }
    let mut data: Vec<Complex64> = u.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    for axis in 0..grid.dim() {
        apply_axis(&grid, &mut data, axis, &mat);
    }
    let scale = t.powi(2 * grid.dim() as i32 + 1);
    for c in data.iter_mut() {
        *c *= scale;
    }
    Field::from_spectral(grid, data)
}

/// `u_{t_u}`, the point of the fiber through `u` on the manifold.
pub fn project_to_manifold(u: &Field, params: &OperatorParams, nl: &Nonlinearity) -> Result<(Field, FiberingResult)> {
    let fr = find_t_u(u, params, nl)?;
    Ok((dilate(u, fr.t_u)?, fr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variational::functionals::{energy, nehari_pohozaev_j};

    fn setup() -> (OperatorParams, Field, Nonlinearity) {
        let p = OperatorParams::new(1, 0.5, 1.0).unwrap();
        let g = Grid::new(1, 256, 40.0).unwrap();
        let u = Field::from_fn(g, |x| 2.0 * (-x[0] * x[0]).exp()).unwrap();
        (p, u, Nonlinearity::Model { c: 2.0 })
    }

    #[test]
    fn t_one_reproduces_energy_and_j() {
        let (p, u, nl) = setup();
        let h1 = fibering_value(&u, 1.0, &p, &nl).unwrap();
        let d1 = fibering_derivative(&u, 1.0, &p, &nl).unwrap();
        let e = energy(&u, &p, &nl).unwrap();
        let j = nehari_pohozaev_j(&u, &p, &nl).unwrap();
        assert!((h1 - e).abs() < 1e-10 * (1.0 + e.abs()));
        assert!((d1 - j).abs() < 1e-10 * (1.0 + j.abs()));
    }

    #[test]
    fn dilation_by_one_is_identity() {
        let (_, u, _) = setup();
        let v = dilate(&u, 1.0).unwrap();
        assert!(v.axpy(-1.0, &u).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn dilation_matches_pointwise_formula() {
        let (_, u, _) = setup();
        for &t in &[0.8, 1.3] {
            let v = dilate(&u, t).unwrap();
            let exact = Field::from_fn(*u.grid(), |x| t * 2.0 * (-(x[0] / (t * t)).powi(2)).exp()).unwrap();
            assert!(v.axpy(-1.0, &exact).unwrap().max_abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn dilation_guard_rejects_wraparound() {
        let (_, u, _) = setup();
        let err = dilate(&u, 4.0).unwrap_err();
        assert!(err.to_string().contains("box length"));
    }

    #[test]
    fn projection_lands_on_manifold() {
        let (p, u, nl) = setup();
        let (v, fr) = project_to_manifold(&u, &p, &nl).unwrap();
        assert_eq!(fr.scan_sign_changes, 1);
        assert!(fr.bracket.0 < fr.t_u && fr.t_u < fr.bracket.1);
        let j = nehari_pohozaev_j(&v, &p, &nl).unwrap();
        let scale = crate::spectral_core::hs_norm_sq(&v, &p).unwrap();
        assert!(j.abs() < 1e-8 * scale, "J = {j}");
    }

    #[test]
    fn zero_nodes_contribute_nothing() {
        let (p, _, nl) = setup();
        let g = Grid::new(1, 64, 20.0).unwrap();
        let u = Field::from_fn(g, |x| if x[0].abs() < 2.0 { (2.0 - x[0].abs()).powi(3) } else { 0.0 }).unwrap();
        assert!(fibering_value(&u, 3.0, &p, &nl).unwrap().is_finite());
        assert!(fibering_derivative(&u, 0.0, &p, &nl).is_err());
    }
}
