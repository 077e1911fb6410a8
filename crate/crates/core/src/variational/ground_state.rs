//! Ground states as minimisers of `Φ` on the Nehari–Pohozaev manifold.
//!
//! Each iteration projects onto `{J = 0}` along the fiber, re-centres the
//! peak on the middle node, and takes a step along the Sobolev gradient
//! `(-Δ+m²)^{-s}(Φ'(u))`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::spectral_core::{apply_multiplier, boundary_decay_ratio, hs_norm_sq, lp_norm, Field, Grid, OperatorParams};
use crate::variational::fibering::project_to_manifold;
use crate::variational::functionals::{
    energy, euler_gradient, nehari_defect, nehari_pohozaev_j, pohozaev_p, PohozaevReport,
};
use crate::variational::nonlinearity::Nonlinearity;

/// Solver controls. Defects are relative to `‖u‖²`, the gradient norm is
/// `|Φ'(u)|₂/|u|₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub max_iter: usize,
    pub step: f64,
    pub tol_gradient: f64,
    pub tol_manifold: f64,
    pub tol_nehari: f64,
    pub tol_pohozaev: f64,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iter: 500,
            step: 0.7,
            tol_gradient: 1e-4,
            tol_manifold: 1e-6,
            tol_nehari: 1e-6,
            tol_pohozaev: 1e-3,
            seed: 1,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(FracError::config("solver.max_iter must be positive"));
        }
        if !(self.step > 0.0 && self.step < 2.0) {
            return Err(FracError::config(format!("solver.step must lie in (0,2), got {}", self.step)));
        }
        for (name, v) in [
            ("solver.tol_gradient", self.tol_gradient),
            ("solver.tol_manifold", self.tol_manifold),
            ("solver.tol_nehari", self.tol_nehari),
            ("solver.tol_pohozaev", self.tol_pohozaev),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(FracError::config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// One row of the iteration trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub energy: f64,
    pub manifold_defect: f64,
    pub nehari_defect: f64,
    pub grad_norm: f64,
}

/// Final state of [`ground_state_solve`].
#[derive(Debug, Clone, Serialize)]
pub struct GroundStateResult {
    #[serde(skip)]
    pub field: Field,
    pub energy: f64,
    /// `J(u)/‖u‖²`.
    pub manifold_defect: f64,
    /// `Φ'(u)·u/‖u‖²`.
    pub nehari_defect: f64,
    pub grad_norm: f64,
    pub pohozaev: PohozaevReport,
    pub iterations: usize,
    pub converged: bool,
    /// Stopped because `‖u‖` fell below a tenth of the collapse radius.
    pub degenerate: bool,
    pub collapse_radius: f64,
    pub last_t: f64,
    pub min_value: f64,
    pub max_value: f64,
    /// `min u ≥ -1e-8 max u`.
    pub positive: bool,
    pub boundary_ratio: f64,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
}

/// Radius `ρ` below which `J > 0`:
/// `ρ = ((N+1-2s) / (p (2N+1) C γ_p^p))^{1/(p-2)}` with `(p, C)` from
/// [`Nonlinearity::growth`] and `γ_p = |u|_p/‖u‖` estimated on `probe`.
pub fn collapse_radius(probe: &Field, params: &OperatorParams, nl: &Nonlinearity) -> Result<f64> {
    let (p, c) = nl.growth();
    let n = params.dim as f64;
    let norm = hs_norm_sq(probe, params)?.sqrt();
    if norm == 0.0 {
        return Err(FracError::domain("collapse radius needs a nonzero probe field"));
    }
    let gamma_p = lp_norm(probe, p)? / norm;
    let base = (n + 1.0 - 2.0 * params.s) / (p * (2.0 * n + 1.0) * c * gamma_p.powf(p));
    Ok(base.powf(1.0 / (p - 2.0)))
}

/// Positive Gaussian bump with amplitude, width and offset drawn from `seed`.
pub fn seed_field(grid: Grid, seed: u64) -> Result<Field> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amp = rng.gen_range(1.5..3.0);
    let width: f64 = rng.gen_range(0.7..1.5);
    let reach = (0.05 * grid.length()).min(2.0);
    let mut centre = [0.0; 3];
    for c in centre.iter_mut().take(grid.dim()) {
        *c = rng.gen_range(-reach..reach);
    }
    Field::from_fn(grid, |x| {
        let r2: f64 = x.iter().zip(&centre).map(|(a, b)| (a - b) * (a - b)).sum();
        amp * (-r2 / (width * width)).exp()
    })
}

struct Measures {
    energy: f64,
    manifold: f64,
    nehari: f64,
    grad_norm: f64,
    gradient: Field,
    norm_sq: f64,
}

fn measure(u: &Field, params: &OperatorParams, nl: &Nonlinearity) -> Result<Measures> {
    let norm_sq = hs_norm_sq(u, params)?;
    let gradient = euler_gradient(u, params, nl)?;
    let l2 = lp_norm(u, 2.0)?;
    Ok(Measures {
        energy: energy(u, params, nl)?,
        manifold: nehari_pohozaev_j(u, params, nl)? / norm_sq,
        nehari: nehari_defect(u, params, nl)? / norm_sq,
        grad_norm: lp_norm(&gradient, 2.0)? / l2,
        gradient,
        norm_sq,
    })
}

/// Projected Sobolev-gradient descent on the manifold from `seed`.
///
/// Returns a result with `converged = false` when the iteration cap is hit
/// and `degenerate = true` on collapse towards zero.
pub fn ground_state_from(
    seed: Field,
    params: &OperatorParams,
    nl: &Nonlinearity,
    opts: &SolverOptions,
) -> Result<GroundStateResult> {
    nl.check_solver_hypotheses(params)?;
    opts.validate()?;
    params.check_grid(seed.grid())?;
    let rho = collapse_radius(&seed, params, nl)?;
    let mut u = seed;
    let mut trace = Vec::new();
    let mut last_t;
    let mut degenerate = false;
    let mut iterations = 0;
    let mut converged = false;
    let mut meas;
    loop {
        let (projected, fr) = project_to_manifold(&u, params, nl)?;
        last_t = fr.t_u;
        u = projected.centered_on_peak();
        meas = measure(&u, params, nl)?;
        trace.push(TraceRow {
            iter: iterations,
            energy: meas.energy,
            manifold_defect: meas.manifold,
            nehari_defect: meas.nehari,
            grad_norm: meas.grad_norm,
        });
        if meas.norm_sq.sqrt() < 0.1 * rho {
            degenerate = true;
            break;
        }
        if meas.grad_norm < opts.tol_gradient
            && meas.manifold.abs() < opts.tol_manifold
            && meas.nehari.abs() < opts.tol_nehari
        {
            converged = true;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        let step = apply_multiplier(&meas.gradient, params, -params.s)?;
        u = u.axpy(-opts.step, &step)?;
        iterations += 1;
    }
    // f is odd, so -u solves whenever u does
    if u.values().iter().fold(0.0f64, |a, &v| a.max(v)) < u.max_abs() {
        u = u.scaled(-1.0);
    }
    let pohozaev = pohozaev_p(&u, params, nl)?;
    let min_value = u.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let max_value = u.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(GroundStateResult {
        energy: meas.energy,
        manifold_defect: meas.manifold,
        nehari_defect: meas.nehari,
        grad_norm: meas.grad_norm,
        pohozaev,
        iterations,
        converged: converged && pohozaev.relative_residual.abs() < opts.tol_pohozaev,
        degenerate,
        collapse_radius: rho,
        last_t,
        min_value,
        max_value,
        positive: min_value >= -1e-8 * max_value,
        boundary_ratio: boundary_decay_ratio(&u),
        trace,
        field: u,
    })
}

/// [`ground_state_from`] with the seed drawn from `opts.seed`.
pub fn ground_state_solve(
    grid: Grid,
    params: &OperatorParams,
    nl: &Nonlinearity,
    opts: &SolverOptions,
) -> Result<GroundStateResult> {
    ground_state_from(seed_field(grid, opts.seed)?, params, nl, opts)
}
