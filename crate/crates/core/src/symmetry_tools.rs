//! Fixed points of `u = I_s f(u)`, the half-space reflection identity and
//! radial diagnostics.
//!
//! The reflection identity at a solution `u` reads, for `x ∈ Σ_λ`,
//! `u(x) - u_λ(x) = ∫_{Σ_λ} (g_s(x-y) - g_s(x_λ-y)) (f(u(y)) - f(u_λ(y))) dy`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bessel_profile::kernel::integrate_from_origin;
use crate::bessel_profile::{bessel_potential, kernel_value, KernelSpec};
use crate::error::{FracError, Result};
use crate::quadrature::GaussLegendre;
use crate::spectral_core::{lp_norm, Field, Grid, OperatorParams};
use crate::variational::{CheckRow, Nonlinearity};

/// Iterates whose `L²` norm grows by more than this factor are divergent.
pub const DIVERGENCE_FACTOR: f64 = 1e6;
/// Iterates whose `L²` norm drops below this fraction of `|u₀|₂` collapsed.
pub const COLLAPSE_FACTOR: f64 = 1e-12;
/// At most this many `x` samples enter the reflection sup.
pub const MAX_REFLECTION_SAMPLES: usize = 2048;
/// Shells whose mean is below this fraction of the peak are left out of
/// the asymmetry measure.
pub const SHELL_FLOOR: f64 = 1e-3;
/// Refinement of the one-dimensional reflection quadrature.
pub const REFINE: usize = 4;
/// `g_s` is treated as zero beyond `m r` of this size (`e^{-200}`).
const KERNEL_RANGE: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointMode {
    /// `u_{k+1} = I_s f(u_k)`.
    Plain,
    /// `u_{k+1} = r_k I_s f(u_k)` with `|u_{k+1}|₂ = |u₀|₂`.
    Normalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixedPointOptions {
    pub mode: FixedPointMode,
    pub max_iter: usize,
    /// Stop when `|u_{k+1} - u_k|₂ / |u_k|₂` falls below this.
    pub tol: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions { mode: FixedPointMode::Normalized, max_iter: 2000, tol: 1e-10 }
    }
}

impl FixedPointOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(FracError::config("fixpoint.max_iter must be positive"));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(FracError::config(format!("fixpoint.tol must lie in (0, 1), got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPointResult {
    #[serde(skip)]
    pub field: Field,
    pub mode: FixedPointMode,
    pub iterations: usize,
    pub converged: bool,
    /// Last relative change between iterates.
    pub change: f64,
    /// `|u - I_s f(u)|₂ / |u|₂` of the returned iterate.
    pub residual: f64,
    /// Last normalization factor `r_k` (1 in plain mode).
    pub ratio: f64,
    /// For homogeneous `f(t) = |t|^{α-1}t` in normalized mode: the true
    /// solution `r^{1/(α-1)} u` and its residual.
    #[serde(skip)]
    pub rescaled: Option<Field>,
    pub rescale_factor: Option<f64>,
    pub rescaled_residual: Option<f64>,
}

/// `|u - I_s f(u)|₂ / |u|₂`; zero for `u = 0`.
pub fn fixed_point_residual(u: &Field, params: &OperatorParams, nl: &Nonlinearity) -> Result<f64> {
    let norm = lp_norm(u, 2.0)?;
    if norm == 0.0 {
        return Ok(0.0);
    }
    let image = bessel_potential(&u.map(|v| nl.f(v))?, params, params.s)?;
    Ok(lp_norm(&u.axpy(-1.0, &image)?, 2.0)? / norm)
}

/// Degree `α` of `f(t) = |t|^{α-1} t`, if `f` is homogeneous of degree > 1.
fn homogeneity(nl: &Nonlinearity) -> Option<f64> {
    match *nl {
        Nonlinearity::Power { p } if p > 2.0 => Some(p - 1.0),
        _ => None,
    }
}

/// Picard iteration of `u ↦ I_s f(u)` from a non-negative seed, with
/// iterates clamped at 0 from below.
pub fn fixed_point_iterate(
    u0: &Field,
    params: &OperatorParams,
    nl: &Nonlinearity,
    opts: &FixedPointOptions,
) -> Result<FixedPointResult> {
    params.check_grid(u0.grid())?;
    nl.validate()?;
    opts.validate()?;
    if let Some(i) = u0.values().iter().position(|&v| v < 0.0) {
        return Err(FracError::domain(format!("fixed-point seed must be non-negative, u0[{i}] = {}", u0.values()[i])));
    }
    let norm0 = lp_norm(u0, 2.0)?;
    let mut result = FixedPointResult {
        field: u0.clone(),
        mode: opts.mode,
        iterations: 0,
        converged: true,
        change: 0.0,
        residual: 0.0,
        ratio: 1.0,
        rescaled: None,
        rescale_factor: None,
        rescaled_residual: None,
    };
    if norm0 == 0.0 {
        return Ok(result);
    }
    let mut u = u0.clone();
    let mut norm = norm0;
    result.converged = false;
    for k in 1..=opts.max_iter {
        let image = bessel_potential(&u.map(|v| nl.f(v))?, params, params.s)?.map(|v| v.max(0.0))?;
        let image_norm = lp_norm(&image, 2.0)?;
        let ratio = match opts.mode {
            FixedPointMode::Plain => 1.0,
            FixedPointMode::Normalized => {
                if image_norm == 0.0 {
                    return Err(FracError::non_convergence(
                        "fixed_point_iterate",
                        format!("collapse at iteration {k}: I_s f(u) vanished"),
                    ));
                }
                norm0 / image_norm
            }
        };
        let next = image.scaled(ratio);
        let next_norm = ratio * image_norm;
        if next_norm > DIVERGENCE_FACTOR * norm0 {
            return Err(FracError::non_convergence(
                "fixed_point_iterate",
                format!("divergence at iteration {k}: |u|₂ grew to {next_norm:.3e}"),
            ));
        }
        if next_norm < COLLAPSE_FACTOR * norm0 {
            return Err(FracError::non_convergence(
                "fixed_point_iterate",
                format!("collapse at iteration {k}: |u|₂ fell to {next_norm:.3e}"),
            ));
        }
        let change = lp_norm(&next.axpy(-1.0, &u)?, 2.0)? / norm;
        u = next;
        norm = next_norm;
        result.iterations = k;
        result.change = change;
        result.ratio = ratio;
        if change < opts.tol {
            result.converged = true;
            break;
        }
    }
    result.residual = fixed_point_residual(&u, params, nl)?;
    if opts.mode == FixedPointMode::Normalized {
        if let Some(alpha) = homogeneity(nl) {
            // u = r I_s f(u) and f(λu) = λ^α f(u) give I_s f(λu) = λu for λ^{α-1} = r
            let lambda = result.ratio.powf(1.0 / (alpha - 1.0));
            let w = u.scaled(lambda);
            result.rescaled_residual = Some(fixed_point_residual(&w, params, nl)?);
            result.rescale_factor = Some(lambda);
            result.rescaled = Some(w);
        }
    }
    result.field = u;
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfSpace {
    /// `Σ_λ = {x_axis < λ}`.
    Below,
    /// `Σ_λ = {x_axis > λ}`.
    Above,
}

/// Plane `x_axis = λ` and the half-space `Σ_λ` on one side of it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionSpec {
    pub axis: usize,
    pub lambda: f64,
    pub orientation: HalfSpace,
}

impl ReflectionSpec {
    pub fn new(axis: usize, lambda: f64, orientation: HalfSpace) -> Self {
        ReflectionSpec { axis, lambda, orientation }
    }

    /// Node-index constant `K` with `(x_λ)` at index `K - i`; exists iff
    /// `2λ/h` is an integer.
    pub fn index_offset(&self, grid: &Grid) -> Result<i64> {
        if self.axis >= grid.dim() {
            return Err(FracError::config(format!("reflection axis {} out of range for N={}", self.axis, grid.dim())));
        }
        if !self.lambda.is_finite() || self.lambda.abs() >= 0.5 * grid.length() {
            return Err(FracError::config(format!(
                "reflection plane λ={} must lie inside the box (|λ| < L/2)",
                self.lambda
            )));
        }
        let h = grid.spacing();
        let k = (2.0 * self.lambda + grid.length()) / h;
        let kr = k.round();
        if (k - kr).abs() > 1e-9 * k.abs().max(1.0) {
            return Err(FracError::config(format!(
                "reflection plane λ={} is not commensurate with h={h}: 2λ/h must be an integer",
                self.lambda
            )));
        }
        Ok(kr as i64)
    }

    fn in_half_space(&self, i: usize, k: i64) -> bool {
        match self.orientation {
            HalfSpace::Below => 2 * (i as i64) < k,
            HalfSpace::Above => 2 * (i as i64) > k,
        }
    }
}

/// Flat index of the node reflected from `flat` (periodic wrap on the axis).
fn reflected_index(grid: &Grid, spec: &ReflectionSpec, k: i64, flat: usize) -> usize {
    let mut idx = grid.unravel(flat);
    idx[spec.axis] = (k - idx[spec.axis] as i64).rem_euclid(grid.n() as i64) as usize;
    grid.ravel(&idx[..grid.dim()])
}

/// `u_λ(x) = u(x_λ)`; an involution on the grid.
pub fn reflect_field(u: &Field, spec: &ReflectionSpec) -> Result<Field> {
    let grid = *u.grid();
    let k = spec.index_offset(&grid)?;
    let vals = u.values();
    Field::new(grid, (0..grid.len()).map(|j| vals[reflected_index(&grid, spec, k, j)]).collect())
}

fn kernel_at(r: f64, spec: &KernelSpec) -> Result<f64> {
    if spec.m * r > KERNEL_RANGE {
        return Ok(0.0);
    }
    kernel_value(r, spec)
}

/// `∫_{|z|<ρ} g_s(z) dz`.
pub fn small_ball_mass(params: &OperatorParams, rho: f64) -> Result<f64> {
    let spec = KernelSpec::new(params);
    let area = match params.dim {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    };
    let d = params.dim as i32;
    Ok(area * integrate_from_origin(params, rho, |r| Ok(kernel_at(r, &spec)? * r.powi(d - 1)))?)
}

/// Samples of the trigonometric interpolant of `u` on a grid `factor` times
/// finer; the Nyquist mode is split evenly between `±n/2`.
pub fn refine_1d(u: &Field, factor: usize) -> Result<Field> {
    let grid = *u.grid();
    if grid.dim() != 1 {
        return Err(FracError::config("refine_1d needs a one-dimensional field"));
    }
    let n = grid.n();
    let nf = n * factor;
    let fine = Grid::new(1, nf, grid.length())?;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); nf];
    for (j, c) in u.spectral().iter().enumerate() {
        let k = grid.freq_index(j);
        if k == -(n as i64) / 2 {
            coeffs[nf - n / 2] += 0.5 * c;
            coeffs[n / 2] += 0.5 * c;
        } else {
            coeffs[k.rem_euclid(nf as i64) as usize] += c;
        }
    }
    Field::from_spectral(fine, coeffs)
}

/// One-dimensional product weights `∫ g_s(|dh + z|) (1 - |z|/h) dz` over
/// `|z| < h`, for integer offsets `d = 0..=d_max`.
fn hat_weights(params: &OperatorParams, h: f64, d_max: usize) -> Result<Vec<f64>> {
    let spec = KernelSpec::new(params);
    let gl = GaussLegendre::new(16);
    let g = |r: f64| kernel_at(r, &spec);
    let mut out = Vec::with_capacity(d_max + 1);
    out.push(2.0 * integrate_from_origin(params, h, |r| Ok(g(r)? * (1.0 - r / h)))?);
    for d in 1..=d_max {
        let df = d as f64;
        let rise = if d == 1 {
            integrate_from_origin(params, h, |r| Ok(g(r)? * r / h))?
        } else {
            let mut acc = Ok(0.0);
            let v = gl.integrate((df - 1.0) * h, df * h, |r| match g(r) {
                Ok(k) => k * (r / h - (df - 1.0)),
                Err(e) => {
                    acc = Err(e);
                    0.0
                }
            });
            acc.map(|a: f64| a + v)?
        };
        let mut acc = Ok(0.0);
        let fall = gl.integrate(df * h, (df + 1.0) * h, |r| match g(r) {
            Ok(k) => k * ((df + 1.0) - r / h),
            Err(e) => {
                acc = Err(e);
                0.0
            }
        });
        out.push(rise + acc.map(|a: f64| a + fall)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct ReflectionReport {
    pub spec: ReflectionSpec,
    pub samples: usize,
    /// Range of `u - u_λ` over the sampled `x ∈ Σ_λ`.
    pub lhs_min: f64,
    pub lhs_max: f64,
    /// `sup |lhs - rhs|` over the samples.
    pub residual: f64,
    pub max_abs_u: f64,
    pub relative_residual: f64,
    /// Bound on the excluded singular cell, `sup_x |f(u) - f(u_λ)|(x) ∫_{|z|<h} g_s`;
    /// zero in one dimension, where that cell is integrated.
    pub singular_bound: f64,
    /// `residual` exceeds `singular_bound` by more than `1e-3 max|u|`.
    pub flagged: bool,
}

/// Both sides of the reflection identity on sampled nodes of `Σ_λ`.
///
/// In one dimension `f(u) - f(u_λ)` is sampled on a grid `REFINE` times
/// finer (trigonometric interpolation of `u`) and integrated against `g_s`
/// exactly on its piecewise-linear interpolant. For `N ≥ 2` the coincident cell is left
/// out and its mass reported as `singular_bound`.
pub fn reflection_residual(
    u: &Field,
    nl: &Nonlinearity,
    spec: &ReflectionSpec,
    params: &OperatorParams,
) -> Result<ReflectionReport> {
    params.check_grid(u.grid())?;
    let grid = *u.grid();
    let k = spec.index_offset(&grid)?;
    let h = grid.spacing();
    let dim = grid.dim();
    let vals = u.values();
    let inside: Vec<usize> = (0..grid.len()).filter(|&j| spec.in_half_space(grid.unravel(j)[spec.axis], k)).collect();
    let reflected: Vec<usize> = (0..grid.len()).map(|j| reflected_index(&grid, spec, k, j)).collect();
    let df: Vec<f64> = (0..grid.len()).map(|j| nl.f(vals[j]) - nl.f(vals[reflected[j]])).collect();
    let stride = inside.len().div_ceil(MAX_REFLECTION_SAMPLES).max(1);
    let samples: Vec<usize> = inside.iter().cloned().step_by(stride).collect();

    let n = grid.n() as i64;
    // squared integer distance between node x and node y, and between x_λ and y
    let offsets = |x: usize, y: usize| -> (i64, i64) {
        let (ix, iy) = (grid.unravel(x), grid.unravel(y));
        let mut direct = 0;
        let mut mirror = 0;
        for a in 0..dim {
            let d = ix[a] as i64 - iy[a] as i64;
            let m = if a == spec.axis { k - ix[a] as i64 - iy[a] as i64 } else { d };
            direct += d * d;
            mirror += m * m;
        }
        (direct, mirror)
    };

    let mut rhs = vec![0.0; samples.len()];
    let mut singular_bound = 0.0;
    if dim == 1 {
        // f(u) - f(u_λ) on a finer y-grid, from the trigonometric interpolant of u
        let fine = refine_1d(u, REFINE)?;
        let nf = fine.grid().n();
        let kf = k * REFINE as i64;
        let fv = fine.values();
        let fine_df: Vec<f64> =
            (0..nf).map(|j| nl.f(fv[j]) - nl.f(fv[(kf - j as i64).rem_euclid(nf as i64) as usize])).collect();
        let fine_inside: Vec<usize> = (0..nf).filter(|&j| spec.in_half_space(j, kf)).collect();
        let w = hat_weights(params, fine.grid().spacing(), 2 * nf + 2)?;
        for (out, &x) in rhs.iter_mut().zip(&samples) {
            let xf = (x * REFINE) as i64;
            *out = fine_inside
                .iter()
                .map(|&y| {
                    let d = (xf - y as i64).unsigned_abs() as usize;
                    let m = (kf - xf - y as i64).unsigned_abs() as usize;
                    (w[d] - w[m]) * fine_df[y]
                })
                .sum();
        }
    } else {
        let kspec = KernelSpec::new(params);
        let max_sq = (dim as i64) * (2 * n + 2) * (2 * n + 2);
        let mut cache = vec![f64::NAN; max_sq as usize + 1];
        let vol = grid.cell_volume();
        let mut weight = |d2: i64| -> Result<f64> {
            if d2 == 0 {
                return Ok(0.0);
            }
            let slot = &mut cache[d2 as usize];
            if slot.is_nan() {
                *slot = vol * kernel_at((d2 as f64).sqrt() * h, &kspec)?;
            }
            Ok(*slot)
        };
        for (out, &x) in rhs.iter_mut().zip(&samples) {
            let mut acc = 0.0;
            for &y in &inside {
                let (d, m) = offsets(x, y);
                acc += (weight(d)? - weight(m)?) * df[y];
            }
            *out = acc;
        }
        let ball = small_ball_mass(params, h)?;
        singular_bound = samples.iter().map(|&x| df[x].abs() * ball).fold(0.0, f64::max);
    }

    let mut lhs_min = f64::INFINITY;
    let mut lhs_max = f64::NEG_INFINITY;
    let mut residual: f64 = 0.0;
    for (&x, r) in samples.iter().zip(&rhs) {
        let lhs = vals[x] - vals[reflected[x]];
        lhs_min = lhs_min.min(lhs);
        lhs_max = lhs_max.max(lhs);
        residual = residual.max((lhs - r).abs());
    }
    if samples.is_empty() {
        lhs_min = 0.0;
        lhs_max = 0.0;
    }
    let max_abs_u = u.max_abs();
    let relative_residual = if max_abs_u > 0.0 { residual / max_abs_u } else { 0.0 };
    Ok(ReflectionReport {
        spec: *spec,
        samples: samples.len(),
        lhs_min,
        lhs_max,
        residual,
        max_abs_u,
        relative_residual,
        singular_bound,
        flagged: residual > singular_bound + 1e-3 * max_abs_u,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AntisymmetryReport {
    pub pairs: usize,
    pub violations: usize,
    /// Smallest `g_s(x-y) - g_s(x_λ-y)` seen.
    pub min_difference: f64,
}

/// Spot check of `g_s(x-y) > g_s(x_λ-y)` on random pairs `x, y ∈ Σ_λ`
/// within `reach` of the plane.
pub fn kernel_antisymmetry_check(
    params: &OperatorParams,
    lambda: f64,
    reach: f64,
    pairs: usize,
    seed: u64,
) -> Result<AntisymmetryReport> {
    if !(reach > 0.0) {
        return Err(FracError::config(format!("reach must be positive, got {reach}")));
    }
    let spec = KernelSpec::new(params);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = params.dim;
    let mut report = AntisymmetryReport { pairs: 0, violations: 0, min_difference: f64::INFINITY };
    while report.pairs < pairs {
        let mut x = [0.0; 3];
        let mut y = [0.0; 3];
        // Σ_λ = {x₁ < λ}, kept strictly off the plane
        x[0] = lambda - rng.gen_range(0.01..reach);
        y[0] = lambda - rng.gen_range(0.01..reach);
        for a in 1..dim {
            x[a] = rng.gen_range(-reach..reach);
            y[a] = rng.gen_range(-reach..reach);
        }
        let dist = |p: &[f64; 3], q: &[f64; 3]| p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let r = dist(&x, &y);
        if r < 1e-3 {
            continue;
        }
        let mut xl = x;
        xl[0] = 2.0 * lambda - x[0];
        let diff = kernel_value(r, &spec)? - kernel_value(dist(&xl, &y), &spec)?;
        report.pairs += 1;
        if !(diff > 0.0) {
            report.violations += 1;
        }
        report.min_difference = report.min_difference.min(diff);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Shell {
    pub radius: f64,
    pub mean: f64,
    pub std: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RadialReport {
    pub center: Vec<f64>,
    pub shells: Vec<Shell>,
    /// Largest `std/|mean|` over shells with `|mean| ≥ SHELL_FLOOR·peak`.
    pub asymmetry: f64,
    /// Increases of the shell mean from one shell to the next, counted when
    /// larger than `1e-9·peak`.
    pub violations: usize,
    pub max_increase: f64,
}

/// `u²`-weighted centroid, taken in minimal-image coordinates around the peak.
pub fn centroid(u: &Field) -> Vec<f64> {
    let grid = *u.grid();
    let l = grid.length();
    let peak = grid.point(u.argmax_abs());
    let mut acc = [0.0; 3];
    let mut mass = 0.0;
    for (j, &v) in u.values().iter().enumerate() {
        let p = grid.point(j);
        let w = v * v;
        mass += w;
        for a in 0..grid.dim() {
            let d = p[a] - peak[a];
            acc[a] += w * (d - l * (d / l).round());
        }
    }
    (0..grid.dim()).map(|a| if mass > 0.0 { peak[a] + acc[a] / mass } else { 0.0 }).collect()
}

/// Trigonometric interpolant of `u` at an arbitrary point.
pub struct SpectralInterpolant<'a> {
    field: &'a Field,
    freqs: Vec<f64>,
}

impl<'a> SpectralInterpolant<'a> {
    pub fn new(field: &'a Field) -> Self {
        let grid = field.grid();
        let freqs = (0..grid.n()).map(|j| grid.freq_index(j) as f64 / grid.length()).collect();
        SpectralInterpolant { field, freqs }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let grid = self.field.grid();
        let n = grid.n();
        let dim = grid.dim();
        let phases: Vec<Vec<Complex64>> = (0..dim)
            .map(|a| self.freqs.iter().map(|&xi| Complex64::from_polar(1.0, 2.0 * PI * xi * x[a])).collect())
            .collect();
        let coeffs = self.field.spectral();
        // contract the last axis first, row-major layout
        let mut level: Vec<Complex64> = coeffs.to_vec();
        for a in (0..dim).rev() {
            level = level.chunks(n).map(|row| row.iter().zip(&phases[a]).map(|(c, e)| c * e).sum()).collect();
        }
        level[0].re / grid.volume()
    }
}

/// Direction samples on the unit sphere `S^{N-1}` for a shell of radius `r`.
fn shell_directions(dim: usize, r: f64, h: f64) -> Vec<[f64; 3]> {
    match dim {
        1 => vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]],
        2 => {
            let count = ((2.0 * PI * r / h).ceil() as usize).clamp(16, 256);
            (0..count)
                .map(|i| {
                    let t = 2.0 * PI * i as f64 / count as f64;
                    [t.cos(), t.sin(), 0.0]
                })
                .collect()
        }
        _ => {
            let count = ((4.0 * PI * r * r / (h * h)).ceil() as usize).clamp(32, 128);
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let t = golden * i as f64;
                    [rho * t.cos(), rho * t.sin(), z]
                })
                .collect()
        }
    }
}

/// Shell statistics of `u` around `center` (default: the `u²` centroid),
/// sampled by spectral interpolation on spheres of radius `k·h` up to `0.4 L`.
pub fn radial_monotonicity_check(u: &Field, center: Option<&[f64]>) -> Result<RadialReport> {
    let grid = *u.grid();
    let dim = grid.dim();
    let center: Vec<f64> = match center {
        Some(c) if c.len() == dim => c.to_vec(),
        Some(c) => {
            return Err(FracError::config(format!("center has {} coordinates, N={dim}", c.len())));
        }
        None => centroid(u),
    };
    let h = grid.spacing();
    let interp = SpectralInterpolant::new(u);
    let count = (0.4 * grid.length() / h).floor() as usize;
    let mut shells = Vec::with_capacity(count + 1);
    for k in 0..=count {
        let r = k as f64 * h;
        let dirs = if k == 0 { vec![[0.0; 3]] } else { shell_directions(dim, r, h) };
        let vals: Vec<f64> = dirs
            .iter()
            .map(|d| {
                let x: Vec<f64> = (0..dim).map(|a| center[a] + r * d[a]).collect();
                interp.eval(&x)
            })
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / vals.len() as f64;
        shells.push(Shell { radius: r, mean, std: var.sqrt(), samples: vals.len() });
    }
    let peak = shells.iter().fold(0.0f64, |acc, s| acc.max(s.mean.abs()));
    let asymmetry = shells
        .iter()
        .filter(|s| peak > 0.0 && s.mean.abs() >= SHELL_FLOOR * peak)
        .map(|s| s.std / s.mean.abs())
        .fold(0.0, f64::max);
    let mut violations = 0;
    let mut max_increase: f64 = 0.0;
    for w in shells.windows(2) {
        let inc = w[1].mean - w[0].mean;
        if inc > 1e-9 * peak {
            violations += 1;
            max_increase = max_increase.max(inc);
        }
    }
    Ok(RadialReport { center, shells, asymmetry, violations, max_increase })
}

/// Writes `radius,mean,std` rows.
pub fn write_shell_csv<W: std::io::Write>(report: &RadialReport, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["radius", "mean", "std"]).map_err(|e| FracError::Format(e.to_string()))?;
    for s in &report.shells {
        out.write_record([format!("{:.17e}", s.radius), format!("{:.17e}", s.mean), format!("{:.17e}", s.std)])
            .map_err(|e| FracError::Format(e.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerIdentity {
    /// `∫|f'(w)|^{q/(β-1)}` on the grid.
    pub lhs: f64,
    /// `α^{q/(β-1)} ∫|w|^q`.
    pub rhs: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogLinChecks {
    /// `f'(t) ≤ 2t`.
    pub derivative_bound: CheckRow,
    /// `f'(t) ≥ 0`.
    pub derivative_nonnegative: CheckRow,
    /// `f''(t) ≥ 0`, by centred differences of `f'`.
    pub convexity: CheckRow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypothesisSReport {
    pub beta: f64,
    pub q: f64,
    /// `q/(β-1)`.
    pub exponent: f64,
    pub critical_exponent: Option<f64>,
    /// `|f'(w)|_{q/(β-1)}`.
    pub derivative_norm: f64,
    pub power_identity: Option<PowerIdentity>,
    pub loglin: Option<LogLinChecks>,
}

fn constraint(ok: bool, name: &str, detail: String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(FracError::config(format!("constraint {name} violated: {detail}")))
    }
}

/// Integrability of `f'(w)` in `L^{q/(β-1)}` for a witness field, with the
/// parameter constraints checked first.
pub fn hypothesis_s_check(
    nl: &Nonlinearity,
    beta: f64,
    q: f64,
    witness: &Field,
    params: &OperatorParams,
) -> Result<HypothesisSReport> {
    nl.validate()?;
    params.check_grid(witness.grid())?;
    let crit = params.critical_exponent();
    let two_star = crit.unwrap_or(f64::INFINITY);
    let n = params.dim as f64;
    constraint(beta > 1.0, "β > 1", format!("β={beta}"))?;
    constraint(beta < two_star - 1.0, "β < 2*_s - 1", format!("β={beta}, 2*_s={two_star}"))?;
    constraint(q >= 2.0, "q ≥ 2", format!("q={q}"))?;
    constraint(q <= two_star, "q ≤ 2*_s", format!("q={q}, 2*_s={two_star}"))?;
    constraint(q > beta, "q > β", format!("q={q}, β={beta}"))?;
    let floor = n * (beta - 1.0) / (2.0 * params.s);
    constraint(q > floor, "q > N(β-1)/(2s)", format!("q={q}, N(β-1)/(2s)={floor}"))?;

    let exponent = q / (beta - 1.0);
    let fprime = witness.map(|v| nl.derivative(v))?;
    let derivative_norm = lp_norm(&fprime, exponent)?;
    let power_identity = match *nl {
        Nonlinearity::Power { p } if (p - 1.0 - beta).abs() < 1e-12 => {
            let alpha = p - 1.0;
            let lhs = derivative_norm.powf(exponent);
            let rhs = alpha.powf(exponent) * lp_norm(witness, q)?.powf(q);
            Some(PowerIdentity { lhs, rhs, relative_error: ((lhs - rhs) / rhs).abs() })
        }
        _ => None,
    };
    let loglin = match nl {
        Nonlinearity::LogLin => {
            let ts: Vec<f64> = (0..=400).map(|i| 1e-3 * 1e6f64.powf(i as f64 / 400.0)).collect();
            let d = |t: f64| nl.derivative(t);
            Some(LogLinChecks {
                derivative_bound: CheckRow::from_margins(ts.iter().map(|&t| 2.0 * t - d(t))),
                derivative_nonnegative: CheckRow::from_margins(ts.iter().map(|&t| d(t))),
                convexity: CheckRow::from_margins(ts.iter().map(|&t| {
                    let e = 1e-4 * t;
                    (d(t + e) - d(t - e)) / (2.0 * e)
                })),
            })
        }
        _ => None,
    };
    Ok(HypothesisSReport { beta, q, exponent, critical_exponent: crit, derivative_norm, power_identity, loglin })
}
