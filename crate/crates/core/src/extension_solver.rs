//! The extension `w(x, y)` of a boundary field `u` to the half-space
//! `y > 0`, realised mode by mode as `ŵ(ξ, y) = û(ξ) Φ_s(c_ξ y)` with
//! `c_ξ = √(m² + 4π²|ξ|²)`.
//!
//! `w` is never stored on an `(x, y)` grid. Every weighted integral is a sum
//! over Fourier modes of a 1-D quadrature in `y`, and modes sharing `|k|²`
//! share one profile column.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::bessel_profile::ProfileTable;
use crate::error::{FracError, Result};
use crate::quadrature::log_trapezoid;
use crate::spectral_core::{Field, Grid, OperatorParams};
use crate::variational::{potential_integral, Nonlinearity, PohozaevReport};

/// Nodes at or below this height resolve the `y^{2s}` boundary layer.
pub const BOUNDARY_LAYER: f64 = 1e-3;
/// Minimum number of boundary-layer nodes for the trace fit.
pub const MIN_LAYER_NODES: usize = 8;

/// Geometric nodes `0 < y₁ < … < y_M`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YMesh {
    nodes: Vec<f64>,
}

impl YMesh {
    /// `count` geometric nodes on `[y_min, y_max]`.
    pub fn geometric(y_min: f64, y_max: f64, count: usize) -> Result<Self> {
        if !(y_min > 0.0 && y_max > y_min && y_max.is_finite()) || count < 2 {
            return Err(FracError::config(format!(
                "y-mesh needs 0 < y_min < y_max and ≥ 2 nodes (got {y_min}, {y_max}, {count})"
            )));
        }
        let ratio = y_max / y_min;
        let nodes = (0..count).map(|i| y_min * ratio.powf(i as f64 / (count - 1) as f64)).collect();
        Ok(YMesh { nodes })
    }

    /// 200 nodes from `1e-8` to `50/m`.
    pub fn default_for(params: &OperatorParams) -> Self {
        YMesh::geometric(1e-8, 50.0 / params.m, 200).expect("default y-mesh is valid")
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn layer_nodes(&self) -> usize {
        self.nodes.iter().filter(|&&y| y <= BOUNDARY_LAYER).count()
    }
}

/// Spectral extension of a boundary field.
#[derive(Debug, Clone)]
pub struct ExtensionField {
    grid: Grid,
    params: OperatorParams,
    k_s: f64,
    ymesh: YMesh,
    coeffs: Vec<Complex64>,
    /// Profile column index of each mode.
    class_of: Vec<usize>,
    /// `c` of each profile column.
    class_c: Vec<f64>,
    /// `Φ_s(c y_j)` and `Φ_s'(c y_j)`, one row of `M` values per column.
    phi: Vec<Vec<f64>>,
    dphi: Vec<Vec<f64>>,
}

/// Builds `ŵ(ξ_k, y_j) = û(ξ_k) Φ_s(c_k y_j)`.
pub fn extend(u: &Field, params: &OperatorParams, table: &ProfileTable, ymesh: &YMesh) -> Result<ExtensionField> {
    params.check_grid(u.grid())?;
    if (table.s - params.s).abs() > 1e-14 {
        return Err(FracError::config(format!("profile table has s = {}, operator has s = {}", table.s, params.s)));
    }
    let grid = *u.grid();
    let mut index: HashMap<i64, usize> = HashMap::new();
    let mut class_of = Vec::with_capacity(grid.len());
    let mut class_c = Vec::new();
    let mut phi = Vec::new();
    let mut dphi = Vec::new();
    for k in 0..grid.len() {
        let idx = grid.unravel(k);
        let key: i64 = idx[..grid.dim()].iter().map(|&j| grid.freq_index(j).pow(2)).sum();
        let next = class_c.len();
        let class = *index.entry(key).or_insert(next);
        if class == next {
            let c = params.symbol(grid.frequency_sq(k)).sqrt();
            let mut row_p = Vec::with_capacity(ymesh.nodes.len());
            let mut row_d = Vec::with_capacity(ymesh.nodes.len());
            for &y in &ymesh.nodes {
                let (p, d) = table.eval(c * y)?;
                row_p.push(p);
                row_d.push(d);
            }
            class_c.push(c);
            phi.push(row_p);
            dphi.push(row_d);
        }
        class_of.push(class);
    }
    Ok(ExtensionField {
        grid,
        params: *params,
        k_s: table.k_s(),
        ymesh: ymesh.clone(),
        coeffs: u.spectral().to_vec(),
        class_of,
        class_c,
        phi,
        dphi,
    })
}

impl ExtensionField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ymesh(&self) -> &YMesh {
        &self.ymesh
    }

    /// Number of distinct profile columns.
    pub fn classes(&self) -> usize {
        self.class_c.len()
    }

    /// `ŵ(ξ_k, y_j)`.
    pub fn coefficient(&self, k: usize, j: usize) -> Complex64 {
        self.coeffs[k] * self.phi[self.class_of[k]][j]
    }

    /// `w(·, y_j)` by inverse transform.
    pub fn layer(&self, j: usize) -> Result<Field> {
        if j >= self.ymesh.nodes.len() {
            return Err(FracError::domain(format!("layer {j} is outside the y-mesh")));
        }
        let coeffs = (0..self.coeffs.len()).map(|k| self.coefficient(k, j)).collect();
        Field::from_spectral(self.grid, coeffs)
    }

    /// `(Σ_classes weight_c · Σ_modes |û|²) / L^N`.
    fn mode_sum<F: Fn(usize) -> f64>(&self, per_class: F) -> f64 {
        let weights: Vec<f64> = (0..self.classes()).map(per_class).collect();
        let sum: f64 = self.coeffs.iter().zip(&self.class_of).map(|(c, &cl)| weights[cl] * c.norm_sqr()).sum();
        sum / self.grid.volume()
    }

    /// Largest `max_j Φ(c y_{j+1}) - Φ(c y_j)` over columns; `≤ 0` when
    /// every slice is non-increasing.
    pub fn monotonicity_margin(&self) -> f64 {
        self.phi.iter().flat_map(|row| row.windows(2).map(|w| w[1] - w[0])).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `∫₀^∞ y^{1-2s} c²(Φ(cy)² + Φ'(cy)²) dy` on the mesh, with the head
/// `(0, y₁)` from `Φ ≈ 1`, `Φ' ≈ -k_s (cy)^{2s-1}`.
fn column_energy(w: &ExtensionField, class: usize) -> f64 {
    let s = w.params.s;
    let c = w.class_c[class];
    let c2 = c * c;
    let ys = &w.ymesh.nodes;
    let vals: Vec<f64> = ys
        .iter()
        .enumerate()
        .map(|(j, &y)| {
            let p = w.phi[class][j];
            let d = w.dphi[class][j];
            y.powf(1.0 - 2.0 * s) * c2 * (p * p + d * d)
        })
        .collect();
    let y1 = ys[0];
    let head =
        c2 * y1.powf(2.0 - 2.0 * s) / (2.0 - 2.0 * s) + w.k_s * w.k_s * c.powf(4.0 * s) * y1.powf(2.0 * s) / (2.0 * s);
    head + log_trapezoid(ys, &vals)
}

/// `∫₀^∞ y^{1-2s} Φ(cy)² dy` on the mesh with the head from `Φ ≈ 1`.
fn column_mass(w: &ExtensionField, class: usize) -> f64 {
    let s = w.params.s;
    let ys = &w.ymesh.nodes;
    let vals: Vec<f64> = ys.iter().enumerate().map(|(j, &y)| y.powf(1.0 - 2.0 * s) * w.phi[class][j].powi(2)).collect();
    ys[0].powf(2.0 - 2.0 * s) / (2.0 - 2.0 * s) + log_trapezoid(ys, &vals)
}

/// `∬ y^{1-2s}(|∇w|² + m² w²) dx dy`; equals `k_s ‖u‖²`.
pub fn weighted_energy(w: &ExtensionField) -> f64 {
    w.mode_sum(|cl| column_energy(w, cl))
}

/// `∬ y^{1-2s} w² dx dy` (no `m²` factor); equals `s k_s low(u)`.
pub fn weighted_mass(w: &ExtensionField) -> f64 {
    w.mode_sum(|cl| column_mass(w, cl))
}

/// Least-squares coefficients of `target ≈ Σ_i a_i basis_i` by modified
/// Gram–Schmidt on column-scaled data.
fn least_squares(columns: &[Vec<f64>], target: &[f64]) -> Vec<f64> {
    let p = columns.len();
    let scales: Vec<f64> =
        columns.iter().map(|c| c.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE)).collect();
    let mut q: Vec<Vec<f64>> = columns.iter().zip(&scales).map(|(c, s)| c.iter().map(|v| v / s).collect()).collect();
    let mut r = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in 0..i {
            let d: f64 = q[i].iter().zip(&q[j]).map(|(a, b)| a * b).sum();
            r[j][i] = d;
            let qj = q[j].clone();
            for (a, b) in q[i].iter_mut().zip(&qj) {
                *a -= d * b;
            }
        }
        let norm = q[i].iter().map(|v| v * v).sum::<f64>().sqrt();
        r[i][i] = norm;
        for a in q[i].iter_mut() {
            *a /= norm;
        }
    }
    let qtb: Vec<f64> = q.iter().map(|col| col.iter().zip(target).map(|(a, b)| a * b).sum()).collect();
    let mut x = vec![0.0; p];
    for i in (0..p).rev() {
        let mut acc = qtb[i];
        for j in i + 1..p {
            acc -= r[i][j] * x[j];
        }
        x[i] = acc / r[i][i];
    }
    x.iter().zip(&scales).map(|(v, s)| v / s).collect()
}

fn layer_indices(w: &ExtensionField) -> Result<Vec<usize>> {
    let idx: Vec<usize> = (0..w.ymesh.nodes.len()).filter(|&j| w.ymesh.nodes[j] <= BOUNDARY_LAYER).collect();
    if idx.len() < MIN_LAYER_NODES {
        return Err(FracError::config(format!(
            "y-mesh has {} nodes below y = {BOUNDARY_LAYER:e}; the trace fit needs at least \
             {MIN_LAYER_NODES} (lower y_min or add nodes)",
            idx.len()
        )));
    }
    Ok(idx)
}

/// Per-column slope `α` of `1 - Φ(cy) ≈ α y^{2s} + β y² + γ y^{2s+2}`.
fn trace_slopes(w: &ExtensionField) -> Result<Vec<f64>> {
    let s = w.params.s;
    let idx = layer_indices(w)?;
    let ys: Vec<f64> = idx.iter().map(|&j| w.ymesh.nodes[j]).collect();
    let basis = vec![
        ys.iter().map(|y| y.powf(2.0 * s)).collect::<Vec<_>>(),
        ys.iter().map(|y| y * y).collect(),
        ys.iter().map(|y| y.powf(2.0 * s + 2.0)).collect(),
    ];
    Ok((0..w.classes())
        .map(|cl| {
            let target: Vec<f64> = idx.iter().map(|&j| 1.0 - w.phi[cl][j]).collect();
            least_squares(&basis, &target)[0]
        })
        .collect())
}

/// `lim_{y→0} -y^{1-2s} ∂_y w`, mode by mode `2s α û` with `α` fitted on
/// the boundary layer; equals `k_s (-Δ+m²)^s u` for an exact extension.
pub fn neumann_trace(w: &ExtensionField) -> Result<Field> {
    let s = w.params.s;
    let slopes = trace_slopes(w)?;
    let coeffs = w.coeffs.iter().zip(&w.class_of).map(|(c, &cl)| c * (2.0 * s * slopes[cl])).collect();
    Field::from_spectral(w.grid, coeffs)
}

/// Largest `|Φ(0⁺) - 1|` over columns, with `Φ(0⁺)` the intercept of a fit
/// of `Φ(cy)` on the boundary layer; `ŵ(ξ, 0⁺) = û(ξ)` to this accuracy.
pub fn trace_extrapolation_error(w: &ExtensionField) -> Result<f64> {
    let s = w.params.s;
    let idx = layer_indices(w)?;
    let ys: Vec<f64> = idx.iter().map(|&j| w.ymesh.nodes[j]).collect();
    let basis = vec![
        vec![1.0; ys.len()],
        ys.iter().map(|y| y.powf(2.0 * s)).collect::<Vec<_>>(),
        ys.iter().map(|y| y * y).collect(),
        ys.iter().map(|y| y.powf(2.0 * s + 2.0)).collect(),
    ];
    let mut worst: f64 = 0.0;
    for cl in 0..w.classes() {
        let target: Vec<f64> = idx.iter().map(|&j| w.phi[cl][j]).collect();
        worst = worst.max((least_squares(&basis, &target)[0] - 1.0).abs());
    }
    Ok(worst)
}

/// Pohozaev identity on the extension side:
/// `(N-2s)/2 ∬y^{1-2s}|∇w|² + m²(N+2-2s)/2 ∬y^{1-2s}w² = N k_s ∫F(u)`.
///
/// `w` must extend `u`; the report is meaningful for any `u`.
pub fn extension_pohozaev_residual(w: &ExtensionField, u: &Field, nl: &Nonlinearity) -> Result<PohozaevReport> {
    if u.grid() != w.grid() {
        return Err(FracError::config("extension and boundary field live on different grids"));
    }
    let n = w.params.dim as f64;
    let s = w.params.s;
    let m2 = w.params.m * w.params.m;
    let mass = weighted_mass(w);
    let gradient = weighted_energy(w) - m2 * mass;
    Ok(PohozaevReport::from_terms(
        0.5 * (n - 2.0 * s) * gradient,
        0.5 * m2 * (n + 2.0 - 2.0 * s) * mass,
        n * w.k_s * potential_integral(u, nl),
    ))
}
