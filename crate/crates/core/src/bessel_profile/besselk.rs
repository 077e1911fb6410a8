//! Modified Bessel function of the second kind from
//! `K_ν(y) = ∫_0^∞ e^{-y cosh t} cosh(νt) dt`.

use crate::error::{FracError, Result};

/// Relative agreement required between the step-h and step-h/2 sums.
pub const BESSEL_K_TOL: f64 = 1e-12;

/// `e^{y} K_ν(y)` with an error estimate.
///
/// Trapezoid rule in `t` (even, entire integrand: the rule converges
/// geometrically). The estimate is the relative gap between steps `h` and `h/2`.
pub fn bessel_k_scaled_with_error(nu: f64, y: f64) -> Result<(f64, f64)> {
    if !(y > 0.0 && y.is_finite()) {
        return Err(FracError::domain(format!("K_ν needs y > 0, got {y}")));
    }
    if !nu.is_finite() {
        return Err(FracError::domain(format!("K_ν needs finite order, got {nu}")));
    }
    let nu = nu.abs();
    let h = (0.5 / y.sqrt()).min(0.1);
    let log_term = |t: f64| -> f64 {
        // ln(e^{-y(cosh t - 1)} cosh(νt)); cosh t - 1 = 2 sinh²(t/2)
        let sh = (0.5 * t).sinh();
        let nt = nu * t;
        let ln_cosh = nt + (0.5 * (1.0 + (-2.0 * nt).exp())).ln();
        -2.0 * y * sh * sh + ln_cosh
    };
    // coarse nodes k·h and midpoints (k+1/2)·h
    let mut coarse = 0.5;
    let mut mid = 0.0;
    let mut peak = 0.0f64;
    let mut k = 0usize;
    loop {
        let tm = (k as f64 + 0.5) * h;
        let lm = log_term(tm);
        mid += lm.exp();
        k += 1;
        let tc = k as f64 * h;
        let lc = log_term(tc);
        coarse += lc.exp();
        peak = peak.max(lc).max(lm);
        // past the peak and negligible
        if lc < peak - 45.0 && lc < lm {
            break;
        }
        if k > 2_000_000 {
            return Err(FracError::non_convergence("bessel_k", format!("integrand did not decay for nu={nu}, y={y}")));
        }
    }
    let coarse_sum = coarse * h;
    let fine_sum = 0.5 * (coarse + mid) * h;
    let err = ((fine_sum - coarse_sum) / fine_sum).abs();
    Ok((fine_sum, err))
}

/// `e^{y} K_ν(y)`; fails when the quadrature error estimate exceeds
/// [`BESSEL_K_TOL`].
pub fn bessel_k_scaled(nu: f64, y: f64) -> Result<f64> {
    let (v, err) = bessel_k_scaled_with_error(nu, y)?;
    if err > BESSEL_K_TOL {
        return Err(FracError::non_convergence(
            "bessel_k",
            format!("relative error estimate {err:.2e} at nu={nu}, y={y}"),
        ));
    }
    Ok(v)
}

/// `K_ν(y)`.
pub fn bessel_k(nu: f64, y: f64) -> Result<f64> {
    Ok(bessel_k_scaled(nu, y)? * (-y).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn half_order_closed_form() {
        for &y in &[1e-8, 1e-3, 0.1, 1.0, 7.5, 40.0, 300.0] {
            let exact = (PI / (2.0 * y)).sqrt();
            let v = bessel_k_scaled(0.5, y).unwrap();
            assert!((v - exact).abs() < 1e-13 * exact, "y={y}: {v} vs {exact}");
        }
    }

    #[test]
    fn three_halves_closed_form() {
        // K_{3/2}(y) = sqrt(π/2y) e^{-y} (1 + 1/y)
        for &y in &[1e-4, 0.3, 2.0, 25.0] {
            let exact = (PI / (2.0 * y)).sqrt() * (1.0 + 1.0 / y);
            let v = bessel_k_scaled(1.5, y).unwrap();
            assert!((v - exact).abs() < 1e-13 * exact, "y={y}");
        }
    }

    #[test]
    fn tabulated_k0_k1() {
        // reference values of K_0(1), K_1(1)
        assert!((bessel_k(0.0, 1.0).unwrap() - 0.421_024_438_240_708_3).abs() < 1e-14);
        assert!((bessel_k(1.0, 1.0).unwrap() - 0.601_907_230_197_234_6).abs() < 1e-14);
    }

    #[test]
    fn rejects_nonpositive_argument() {
        assert!(bessel_k(0.3, 0.0).is_err());
        assert!(bessel_k(0.3, -1.0).is_err());
    }
}
