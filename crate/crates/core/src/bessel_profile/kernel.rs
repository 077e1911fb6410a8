//! The Bessel kernel `g_s`, the convolution kernel of `(m² - Δ)^{-s}`:
//!
//! `g_s(x) = 1/((4π)^s Γ(s)) ∫_0^∞ e^{-π|x|²/δ} e^{-m²δ/(4π)} δ^{(2s-N)/2} dδ/δ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::gamma;
use crate::error::{FracError, Result};
use crate::quadrature::GaussLegendre;
use crate::spectral_core::{apply_multiplier, Field, OperatorParams};

/// Required agreement between the step-h and step-h/2 sums.
pub const KERNEL_TOL: f64 = 1e-10;

/// Parameters and quadrature scheme of a kernel evaluation.
///
/// The `δ`-integral is a trapezoid sum in `u = ln δ`, anchored at the peak
/// of the integrand and truncated where it has dropped by `e^{-cutoff}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KernelSpec {
    pub dim: usize,
    pub s: f64,
    pub m: f64,
    /// Step in `ln δ`.
    pub step: f64,
    /// Truncation depth in units of the log-integrand.
    pub cutoff: f64,
}

impl KernelSpec {
    pub fn new(params: &OperatorParams) -> Self {
        KernelSpec { dim: params.dim, s: params.s, m: params.m, step: 0.1, cutoff: 40.0 }
    }

    fn validate(&self) -> Result<()> {
        OperatorParams::new(self.dim, self.s, self.m)?;
        if !(self.step > 0.0 && self.step <= 0.5) {
            return Err(FracError::config(format!("kernel step must lie in (0, 0.5], got {}", self.step)));
        }
        if !(self.cutoff >= 30.0) {
            return Err(FracError::config(format!(
                "kernel cutoff must be ≥ 30 (truncation below 1e-13), got {}",
                self.cutoff
            )));
        }
        Ok(())
    }
}

/// `g_s` at distance `r = |x|`, with a quadrature error estimate.
pub fn kernel_value_with_error(r: f64, spec: &KernelSpec) -> Result<(f64, f64)> {
    spec.validate()?;
    if !(r >= 0.0 && r.is_finite()) {
        return Err(FracError::domain(format!("kernel radius must be finite and ≥ 0, got {r}")));
    }
    let n = spec.dim as f64;
    let a = (2.0 * spec.s - n) / 2.0;
    let b = PI * r * r;
    let c = spec.m * spec.m / (4.0 * PI);
    if b == 0.0 && a <= 0.0 {
        return Err(FracError::domain(format!(
            "g_s is singular at the origin when 2s ≤ N (s={}, N={})",
            spec.s, spec.dim
        )));
    }
    let phi = |u: f64| -b * (-u).exp() - c * u.exp() + a * u;
    let dphi = |u: f64| b * (-u).exp() - c * u.exp() + a;

    // φ is strictly concave; bracket and bisect-Newton for the peak
    let (mut lo, mut hi) = (-1.0, 1.0);
    while dphi(lo) <= 0.0 {
        lo -= 2.0 * (hi - lo);
    }
    while dphi(hi) >= 0.0 {
        hi += 2.0 * (hi - lo);
    }
    let mut u = 0.5 * (lo + hi);
    for _ in 0..200 {
        let g = dphi(u);
        if g > 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        let curv = -b * (-u).exp() - c * u.exp();
        let mut next = u - g / curv;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - u).abs() < 1e-14 * (1.0 + u.abs()) {
            u = next;
            break;
        }
        u = next;
    }
    let peak_u = u;
    let peak = phi(peak_u);

    // the peak narrows like (curvature)^{-1/2} as r grows
    let curvature = b * (-peak_u).exp() + c * peak_u.exp();
    let h = spec.step.min(0.25 / curvature.sqrt());
    let mut coarse = 1.0;
    let mut mid = 0.0;
    for dir in [-1.0, 1.0] {
        let mut k = 1usize;
        loop {
            let uc = peak_u + dir * k as f64 * h;
            let um = peak_u + dir * (k as f64 - 0.5) * h;
            let lc = phi(uc) - peak;
            coarse += lc.exp();
            mid += (phi(um) - peak).exp();
            if lc < -spec.cutoff {
                break;
            }
            k += 1;
            if k > 10_000_000 {
                return Err(FracError::non_convergence("kernel_value", "integrand did not decay"));
            }
        }
    }
    let pref = peak.exp() / ((4.0 * PI).powf(spec.s) * gamma(spec.s));
    let coarse_sum = coarse * h * pref;
    let fine_sum = 0.5 * (coarse + mid) * h * pref;
    let err = ((fine_sum - coarse_sum) / fine_sum).abs();
    Ok((fine_sum, err))
}

/// `g_s(x)` at `r = |x|`; fails if the quadrature error estimate exceeds
/// `1e-10` relative.
pub fn kernel_value(r: f64, spec: &KernelSpec) -> Result<f64> {
    let (v, err) = kernel_value_with_error(r, spec)?;
    if err > KERNEL_TOL {
        return Err(FracError::non_convergence("kernel_value", format!("error estimate {err:.2e} at r={r}")));
    }
    Ok(v)
}

/// `∫₀^b F(r) dr` for `F` carrying the origin singularity of `g_s`
/// (`r^{2s-N}`, or `log r` when `2s = N`), via `r = b τ^q` with `q` chosen to
/// smooth the leading term, on dyadic panels in `τ`.
pub fn integrate_from_origin<F: Fn(f64) -> Result<f64>>(params: &OperatorParams, b: f64, f: F) -> Result<f64> {
    let n = params.dim as f64;
    let excess = 2.0 * params.s - n;
    let q = if excess.abs() < 1e-12 {
        2.0
    } else if excess < 0.0 {
        (1.0 / params.s).max(1.0)
    } else {
        1.0
    };
    let gl = GaussLegendre::new(16);
    let mut total = 0.0;
    let mut err = None;
    for j in 0..40 {
        let hi = 0.5f64.powi(j);
        let lo = 0.5 * hi;
        total += gl.integrate(lo, hi, |tau| {
            let r = b * tau.powf(q);
            match f(r) {
                Ok(v) => v * b * q * tau.powf(q - 1.0),
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            }
        });
    }
    match err {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// `ĝ_s(ξ) = 2∫₀^∞ g_s(r) cos(2πξr) dr` for `N = 1`, by direct quadrature.
pub fn kernel_fourier_1d(xi: f64, params: &OperatorParams) -> Result<f64> {
    if params.dim != 1 {
        return Err(FracError::config(format!("kernel Fourier quadrature is one-dimensional, got N={}", params.dim)));
    }
    if !xi.is_finite() {
        return Err(FracError::domain(format!("frequency must be finite, got {xi}")));
    }
    let spec = KernelSpec::new(params);
    let w = 2.0 * PI * xi;
    let head = integrate_from_origin(params, 1.0, |r| Ok(kernel_value(r, &spec)? * (w * r).cos()))?;
    // g_s(r) < e^{-m r} r^{...}: stop where m r = 45
    let r_max = (45.0 / params.m).max(2.0);
    let width = (0.25 / xi.abs().max(1e-3)).min(0.5);
    let panels = ((r_max - 1.0) / width).ceil() as usize;
    let gl = GaussLegendre::new(16);
    let mut err = None;
    let tail = gl.integrate_composite(1.0, r_max, panels, |r| match kernel_value(r, &spec) {
        Ok(g) => g * (w * r).cos(),
        Err(e) => {
            err.get_or_insert(e);
            0.0
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(2.0 * (head + tail)),
    }
}

/// Bessel potential `I_σ f = (m² - Δ)^{-σ} f` for `σ > 0`, applied spectrally.
pub fn bessel_potential(f: &Field, params: &OperatorParams, sigma: f64) -> Result<Field> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(FracError::domain(format!("Bessel potential order must be positive, got {sigma}")));
    }
    apply_multiplier(f, params, -sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel_profile::bessel_k;

    fn spec(dim: usize, s: f64, m: f64) -> KernelSpec {
        KernelSpec::new(&OperatorParams::new(dim, s, m).unwrap())
    }

    #[test]
    fn one_dim_half_order_closed_form() {
        // N=1, s=1/2: g = K_0(m r)/π
        let sp = spec(1, 0.5, 1.3);
        for &r in &[0.01, 0.4, 2.0, 9.0] {
            let exact = bessel_k(0.0, 1.3 * r).unwrap() / PI;
            let v = kernel_value(r, &sp).unwrap();
            assert!((v - exact).abs() < 1e-11 * exact, "r={r}: {v} vs {exact}");
        }
    }

    #[test]
    fn fourier_transform_is_the_inverse_symbol() {
        for &s in &[0.25, 0.5, 0.75] {
            let p = OperatorParams::new(1, s, 1.0).unwrap();
            for &xi in &[0.0, 0.1, 0.3, 0.7, 1.5] {
                let got = kernel_fourier_1d(xi, &p).unwrap();
                let want = p.symbol(xi * xi).powf(-s);
                assert!((got - want).abs() < 1e-6 * want, "s={s} ξ={xi}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn origin_singularity_is_rejected() {
        assert!(kernel_value(0.0, &spec(1, 0.5, 1.0)).is_err());
        assert!(kernel_value(0.0, &spec(2, 0.75, 1.0)).is_err());
        // 2s > N: finite at the origin
        assert!(kernel_value(0.0, &spec(1, 0.75, 1.0)).unwrap() > 0.0);
    }

    #[test]
    fn negative_order_potential_rejected() {
        let grid = crate::spectral_core::Grid::new(1, 8, 1.0).unwrap();
        let p = OperatorParams::new(1, 0.5, 1.0).unwrap();
        assert!(bessel_potential(&Field::zeros(grid), &p, 0.0).is_err());
        assert!(bessel_potential(&Field::zeros(grid), &p, -0.3).is_err());
    }
}
