//! Periodic grids, real fields with cached spectra, and Fourier multipliers
//! `(m² + 4π²|ξ|²)^σ`.
//!
//! Fourier convention: `û(ξ) = ∫ e^{-2πi x·ξ} u(x) dx`. On a box
//! `[-L/2, L/2)^N` with `n` nodes per axis the coefficients are
//! `û(ξ_k) ≈ h^N · (-1)^{|k|} · DFT(u)_k`, `ξ_k = k / L`, so that
//! `|u|₂² = L^{-N} Σ_k |û(ξ_k)|²` holds exactly on the grid.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};

/// Uniform isotropic grid on `[-L/2, L/2)^N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: usize,
    length: f64,
}

impl Grid {
    /// `dim ∈ {1,2,3}`, `n` a power of two (≥ 2), `length > 0`.
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(FracError::config(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(FracError::config(format!("points per axis must be a power of two ≥ 2, got {n}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(FracError::config(format!("box length must be positive, got {length}")));
        }
        Ok(Grid { dim, n, length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// `h^N`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// `L^N`.
    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Total number of nodes `n^N`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of node `i` along any axis.
    pub fn coord(&self, i: usize) -> f64 {
        -0.5 * self.length + i as f64 * self.spacing()
    }

    /// Largest resolved frequency `n / (2L)`.
    pub fn nyquist(&self) -> f64 {
        self.n as f64 / (2.0 * self.length)
    }

    /// Multi-index of a flat row-major index (last axis fastest).
    pub fn unravel(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for a in (0..self.dim).rev() {
            idx[a] = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().take(self.dim).fold(0, |acc, &i| acc * self.n + i)
    }

    /// Physical coordinates of a flat index; unused axes are zero.
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = self.coord(idx[a]);
        }
        x
    }

    /// Signed integer frequency of FFT-ordered index `j` on one axis.
    pub fn freq_index(&self, j: usize) -> i64 {
        if j < self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// Frequency vector `ξ_k` (in cycles per unit length) of a flat spectral index.
    pub fn frequency(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let mut xi = [0.0; 3];
        for a in 0..self.dim {
            xi[a] = self.freq_index(idx[a]) as f64 / self.length;
        }
        xi
    }

    /// `|ξ_k|²` of a flat spectral index.
    pub fn frequency_sq(&self, flat: usize) -> f64 {
        let xi = self.frequency(flat);
        xi.iter().map(|v| v * v).sum()
    }

    /// `|ξ_k|²` for every spectral index.
    pub fn frequency_sq_table(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.frequency_sq(k)).collect()
    }

    /// `|x_j|²` for every node.
    pub fn radius_sq_table(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.point(j).iter().map(|v| v * v).sum()).collect()
    }

    fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(FracError::config(format!("grid mismatch: {self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// Operator parameters: dimension `N`, fractional order `s`, mass `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorParams {
    pub dim: usize,
    pub s: f64,
    pub m: f64,
}

impl OperatorParams {
    /// `0 < s < 1`, `m > 0`, `N ∈ {1,2,3}`.
    ///
    /// `N ≤ 2s` (only `N = 1, s ≥ 1/2`) is accepted; operations that need a
    /// finite critical exponent reject it themselves.
    pub fn new(dim: usize, s: f64, m: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(FracError::config(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(FracError::config(format!("s must lie in (0,1), got {s}")));
        }
        if !(m.is_finite() && m > 0.0) {
            return Err(FracError::config(format!("mass must be positive, got {m}")));
        }
        Ok(OperatorParams { dim, s, m })
    }

    /// Symbol base `m² + 4π²|ξ|²`.
    pub fn symbol(&self, xi_sq: f64) -> f64 {
        self.m * self.m + 4.0 * PI * PI * xi_sq
    }

    /// `2*_s = 2N/(N-2s)`, or `None` when `N ≤ 2s`.
    pub fn critical_exponent(&self) -> Option<f64> {
        critical_exponent(self.dim, self.s)
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if grid.dim() != self.dim {
            return Err(FracError::config(format!(
                "operator dimension {} does not match grid dimension {}",
                self.dim,
                grid.dim()
            )));
        }
        Ok(())
    }
}

/// Fractional Sobolev critical exponent `2N/(N-2s)`; `None` if `N ≤ 2s`.
pub fn critical_exponent(dim: usize, s: f64) -> Option<f64> {
    let n = dim as f64;
    if n > 2.0 * s {
        Some(2.0 * n / (n - 2.0 * s))
    } else {
        None
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(n, direction))
}

/// In-place unnormalized N-dimensional FFT on row-major data.
fn fft_nd(grid: &Grid, data: &mut [Complex64], direction: FftDirection) {
    let n = grid.n();
    let fft = plan(n, direction);
    let total = data.len();
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for axis in 0..grid.dim() {
        let stride = n.pow((grid.dim() - 1 - axis) as u32);
        if stride == 1 {
            for chunk in data.chunks_mut(n) {
                fft.process_with_scratch(chunk, &mut scratch);
            }
            continue;
        }
        let block = stride * n;
        for base in (0..total).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[start + i * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (i, v) in line.iter().enumerate() {
                    data[start + i * stride] = *v;
                }
            }
        }
    }
}

/// `(-1)^{j_1+…+j_N}` for an FFT-ordered flat index; recenters the DFT on a
/// box starting at `-L/2`.
fn centering_sign(grid: &Grid, flat: usize) -> f64 {
    let idx = grid.unravel(flat);
    let parity: usize = idx.iter().take(grid.dim()).sum();
    if parity.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn forward_transform(grid: &Grid, values: &[f64]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(grid, &mut data, FftDirection::Forward);
    let hn = grid.cell_volume();
    for (k, c) in data.iter_mut().enumerate() {
        *c *= hn * centering_sign(grid, k);
    }
    data
}

fn inverse_transform(grid: &Grid, coeffs: &[Complex64]) -> Vec<f64> {
    let mut data: Vec<Complex64> = coeffs.iter().enumerate().map(|(k, &c)| c * centering_sign(grid, k)).collect();
    fft_nd(grid, &mut data, FftDirection::Inverse);
    let scale = 1.0 / grid.volume();
    data.iter().map(|c| c.re * scale).collect()
}

/// Real field sampled on a [`Grid`], with a lazily computed spectrum.
///
/// The spectrum cache is dropped by every mutable access to the values.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
    spectral: OnceLock<Vec<Complex64>>,
}

impl Field {
    /// Wraps samples; all values must be finite and match the grid size.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(FracError::config(format!("field has {} samples, grid expects {}", values.len(), grid.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FracError::domain(format!("non-finite sample at index {i}")));
        }
        Ok(Field { grid, values, spectral: OnceLock::new() })
    }

    pub fn zeros(grid: Grid) -> Self {
        Field { grid, values: vec![0.0; grid.len()], spectral: OnceLock::new() }
    }

    /// Samples `f(x)` at every node; `x` has `grid.dim()` entries.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(grid: Grid, f: F) -> Result<Self> {
        let values = (0..grid.len())
            .map(|j| {
                let p = grid.point(j);
                f(&p[..grid.dim()])
            })
            .collect();
        Field::new(grid, values)
    }

    /// Field whose spectrum is `coeffs` (FFT order); imaginary residue of the
    /// inverse transform is discarded.
    pub fn from_spectral(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(FracError::config("spectral coefficient count does not match grid"));
        }
        let values = inverse_transform(&grid, &coeffs);
        let field = Field::new(grid, values)?;
        Ok(field)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable samples; invalidates the cached spectrum.
    pub fn values_mut(&mut self) -> &mut [f64] {
        self.spectral = OnceLock::new();
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Coefficients `û(ξ_k)` in FFT order.
    pub fn spectral(&self) -> &[Complex64] {
        self.spectral.get_or_init(|| forward_transform(&self.grid, &self.values))
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<Field> {
        Field::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, a: f64) -> Field {
        Field { grid: self.grid, values: self.values.iter().map(|v| a * v).collect(), spectral: OnceLock::new() }
    }

    /// `self + a·other`.
    pub fn axpy(&self, a: f64, other: &Field) -> Result<Field> {
        self.grid.check_same(&other.grid)?;
        Field::new(self.grid, self.values.iter().zip(&other.values).map(|(x, y)| x + a * y).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }

    /// Flat index of the largest `|u|` (first one on ties).
    pub fn argmax_abs(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if v.abs() > self.values[best].abs() {
                best = i;
            }
        }
        best
    }

    /// `h^N Σ u`.
    pub fn integral(&self) -> f64 {
        self.grid.cell_volume() * self.values.iter().sum::<f64>()
    }

    /// Periodic shift by an integer number of nodes per axis.
    pub fn rolled(&self, shift: &[i64]) -> Field {
        let n = self.grid.n() as i64;
        let mut out = vec![0.0; self.values.len()];
        for (j, &v) in self.values.iter().enumerate() {
            let idx = self.grid.unravel(j);
            let mut target = [0usize; 3];
            for a in 0..self.grid.dim() {
                target[a] = (idx[a] as i64 + shift[a]).rem_euclid(n) as usize;
            }
            out[self.grid.ravel(&target[..self.grid.dim()])] = v;
        }
        Field { grid: self.grid, values: out, spectral: OnceLock::new() }
    }

    /// Shifts the peak of `|u|` to the central node.
    pub fn centered_on_peak(&self) -> Field {
        let idx = self.grid.unravel(self.argmax_abs());
        let mid = (self.grid.n() / 2) as i64;
        let mut shift = [0i64; 3];
        for a in 0..self.grid.dim() {
            shift[a] = mid - idx[a] as i64;
        }
        self.rolled(&shift)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.values == other.values
    }
}

fn check_finite_exponent(sigma: f64) -> Result<()> {
    if !sigma.is_finite() {
        return Err(FracError::domain(format!("multiplier exponent must be finite, got {sigma}")));
    }
    Ok(())
}

/// Applies `(m² + 4π²|ξ|²)^σ` spectrally.
///
/// `σ = s` is the operator, `σ = s/2` its square root, `σ = -s` the Bessel
/// potential. Real fields map to real fields.
pub fn apply_multiplier(u: &Field, params: &OperatorParams, sigma: f64) -> Result<Field> {
    params.check_grid(u.grid())?;
    check_finite_exponent(sigma)?;
    let grid = *u.grid();
    let coeffs: Vec<Complex64> =
        u.spectral().iter().enumerate().map(|(k, &c)| c * params.symbol(grid.frequency_sq(k)).powf(sigma)).collect();
    let mut out = Field::from_spectral(grid, coeffs.clone())?;
    out.spectral = OnceLock::from(coeffs);
    Ok(out)
}

/// `L^{-N} Σ_k w(|ξ_k|²) |û_k|²` for a real weight `w`.
pub fn spectral_quadratic<W: Fn(f64) -> f64>(u: &Field, weight: W) -> f64 {
    let grid = u.grid();
    u.spectral().iter().enumerate().map(|(k, c)| weight(grid.frequency_sq(k)) * c.norm_sqr()).sum::<f64>()
        / grid.volume()
}

/// `⟨u, v⟩ = L^{-N} Σ (m²+4π²|ξ|²)^s Re(û conj v̂)`.
pub fn hs_inner(u: &Field, v: &Field, params: &OperatorParams) -> Result<f64> {
    params.check_grid(u.grid())?;
    u.grid().check_same(v.grid())?;
    let grid = u.grid();
    let sum: f64 = u
        .spectral()
        .iter()
        .zip(v.spectral())
        .enumerate()
        .map(|(k, (a, b))| params.symbol(grid.frequency_sq(k)).powf(params.s) * (a * b.conj()).re)
        .sum();
    Ok(sum / grid.volume())
}

/// `‖u‖² = ⟨u, u⟩`.
pub fn hs_norm_sq(u: &Field, params: &OperatorParams) -> Result<f64> {
    params.check_grid(u.grid())?;
    Ok(spectral_quadratic(u, |q| params.symbol(q).powf(params.s)))
}

/// `∫ |û|² / (m² + 4π²|ξ|²)^{1-s} dξ`.
pub fn low_order_mass(u: &Field, params: &OperatorParams) -> Result<f64> {
    params.check_grid(u.grid())?;
    Ok(spectral_quadratic(u, |q| params.symbol(q).powf(params.s - 1.0)))
}

/// `(h^N Σ |u|^p)^{1/p}` for `p ≥ 1`; `p = ∞` gives `max |u|`.
pub fn lp_norm(u: &Field, p: f64) -> Result<f64> {
    if p.is_infinite() && p > 0.0 {
        return Ok(u.max_abs());
    }
    if !(p >= 1.0) {
        return Err(FracError::domain(format!("L^p norm needs p ≥ 1, got {p}")));
    }
    let sum: f64 = u.values().iter().map(|v| v.abs().powf(p)).sum();
    Ok((u.grid().cell_volume() * sum).powf(1.0 / p))
}

/// `h^N Σ u v`.
pub fn l2_inner(u: &Field, v: &Field) -> Result<f64> {
    u.grid().check_same(v.grid())?;
    Ok(u.grid().cell_volume() * u.values().iter().zip(v.values()).map(|(a, b)| a * b).sum::<f64>())
}

/// `max |u|` on the box faces divided by `max |u|`; small values mean the
/// periodic box does not distort the field.
pub fn boundary_decay_ratio(u: &Field) -> f64 {
    let grid = u.grid();
    let peak = u.max_abs();
    if peak == 0.0 {
        return 0.0;
    }
    let mut edge: f64 = 0.0;
    for (j, v) in u.values().iter().enumerate() {
        let idx = grid.unravel(j);
        if idx.iter().take(grid.dim()).any(|&i| i == 0) {
            edge = edge.max(v.abs());
        }
    }
    edge / peak
}
