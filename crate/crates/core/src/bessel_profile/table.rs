//! Tabulated profile `Φ_s` on a geometric mesh with analytic head and tail.
//!
//! Nodes above [`SERIES_SWITCH`] come from the `K_s` integral representation,
//! nodes below it from the convergent Frobenius series.

use serde::Serialize;

use super::{besselk::bessel_k_scaled_with_error, c1, gamma, k_s};
use crate::error::{FracError, Result};
use crate::quadrature::log_trapezoid;

/// Beyond this point integrals use the fitted exponential tail.
pub const DEFAULT_Y_CUT: f64 = 30.0;
/// Mesh nodes per unit of `ln y`.
pub const DEFAULT_MESH_DENSITY: f64 = 100.0;
/// First mesh node; below it the small-`y` expansion is used.
pub const Y_MIN: f64 = 1e-10;

const PROFILE_QUAD_TOL: f64 = 1e-12;

/// Below this argument the table uses the Frobenius series: the `K_s`
/// quadrature carries ~1e-15 relative noise, which swamps `1 - Φ_s` there.
pub const SERIES_SWITCH: f64 = 0.25;

/// `Φ_s` and `Φ_s'` from `Σ a_k y^{2k} - c₁ Σ b_k y^{2s+2k}` with
/// `a_k = a_{k-1}/(4k(k-s))`, `b_k = b_{k-1}/(4k(k+s))`, `a_0 = b_0 = 1`.
pub fn frobenius(s: f64, c1: f64, y: f64) -> (f64, f64) {
    let y2 = y * y;
    let ys = y.powf(2.0 * s);
    let (mut a, mut b) = (1.0, 1.0);
    let (mut pa, mut pb) = (1.0, 1.0);
    let (mut p, mut dp) = (1.0 - c1 * ys, -c1 * 2.0 * s * ys / y);
    for k in 1..60 {
        let kf = k as f64;
        a /= 4.0 * kf * (kf - s);
        b /= 4.0 * kf * (kf + s);
        pa *= y2;
        pb *= y2;
        let ta = a * pa;
        let tb = c1 * b * pb * ys;
        p += ta - tb;
        dp += (2.0 * kf * ta - (2.0 * s + 2.0 * kf) * tb) / y;
        if ta.abs() + tb.abs() < 1e-18 * p.abs() {
            break;
        }
    }
    (p, dp)
}

/// `Φ_s` and `Φ_s'` on a strictly increasing mesh, plus the fitted tail
/// `Φ_s(y) ≈ A y^{(2s-1)/2} e^{-y}` for `y > y_cut`.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileTable {
    pub s: f64,
    pub mesh: Vec<f64>,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    pub tail_amplitude: f64,
    pub y_cut: f64,
    k_s: f64,
    c1: f64,
}

/// Tabulates `Φ_s` on `[1e-10, y_max]` with `mesh_density` nodes per unit of
/// `ln y`.
///
/// Nodes where the `K_ν` quadrature estimate exceeds its tolerance abort the
/// computation, reporting the worst node.
pub fn compute_profile(s: f64, y_max: f64, mesh_density: f64) -> Result<ProfileTable> {
    let ks = k_s(s)?;
    if !(y_max >= DEFAULT_Y_CUT && y_max.is_finite()) {
        return Err(FracError::config(format!("profile y_max must be ≥ 30, got {y_max}")));
    }
    if !(mesh_density >= 10.0 && mesh_density.is_finite()) {
        return Err(FracError::config(format!("mesh density must be ≥ 10 nodes per e-fold, got {mesh_density}")));
    }
    let span = (y_max / Y_MIN).ln();
    let count = (span * mesh_density).ceil() as usize;
    let step = span / count as f64;
    let mesh: Vec<f64> =
        (0..=count).map(|k| if k == count { y_max } else { Y_MIN * (k as f64 * step).exp() }).collect();

    let norm = 2f64.powf(1.0 - s) / gamma(s);
    let mut phi = Vec::with_capacity(mesh.len());
    let mut dphi = Vec::with_capacity(mesh.len());
    let mut worst = (0.0f64, 0.0f64);
    let c1v = c1(s)?;
    for &y in &mesh {
        if y <= SERIES_SWITCH {
            let (p, d) = frobenius(s, c1v, y);
            phi.push(p);
            dphi.push(d);
            continue;
        }
        let lead = norm * y.powf(s) * (-y).exp();
        let (ks_val, e1) = bessel_k_scaled_with_error(s, y)?;
        let (k1s_val, e2) = bessel_k_scaled_with_error(1.0 - s, y)?;
        let e = e1.max(e2);
        if e > worst.0 {
            worst = (e, y);
        }
        phi.push(lead * ks_val);
        dphi.push(-lead * k1s_val);
    }
    if worst.0 > PROFILE_QUAD_TOL {
        return Err(FracError::non_convergence(
            "compute_profile",
            format!("K_ν quadrature error {:.2e} at worst node y={:.6e}", worst.0, worst.1),
        ));
    }

    // tail fit over the last e-fold below y_max
    let lo = y_max - 1.0;
    let (mut acc, mut cnt) = (0.0, 0usize);
    for (&y, &p) in mesh.iter().zip(&phi) {
        if y >= lo {
            acc += (p / (y.powf(s - 0.5) * (-y).exp())).ln();
            cnt += 1;
        }
    }
    let tail_amplitude = (acc / cnt as f64).exp();

    Ok(ProfileTable { s, mesh, phi, dphi, tail_amplitude, y_cut: y_max, k_s: ks, c1: c1v })
}

impl ProfileTable {
    pub fn k_s(&self) -> f64 {
        self.k_s
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    /// `(Φ, Φ', Φ'', Φ''')` at a node, higher derivatives from the ODE.
    fn jet(&self, y: f64, phi: f64, dphi: f64) -> [f64; 4] {
        let a = 1.0 - 2.0 * self.s;
        let d2 = phi - a * dphi / y;
        let d3 = dphi - a * d2 / y + a * dphi / (y * y);
        [phi, dphi, d2, d3]
    }

    /// `(Φ_s(y), Φ_s'(y))` for `y ≥ 0`.
    ///
    /// Quintic Hermite interpolation inside the table (higher derivatives
    /// from the ODE), the small-`y` expansion below the first node
    /// and the fitted tail beyond `y_cut`.
    pub fn eval(&self, y: f64) -> Result<(f64, f64)> {
        if !(y >= 0.0) {
            return Err(FracError::domain(format!("profile argument must be ≥ 0, got {y}")));
        }
        let s = self.s;
        if y == 0.0 {
            return Ok((1.0, f64::NEG_INFINITY));
        }
        if y < self.mesh[0] {
            let a2 = 1.0 / (4.0 * (1.0 - s));
            let p = 1.0 - self.c1 * y.powf(2.0 * s) + a2 * y * y;
            let d = -self.k_s * y.powf(2.0 * s - 1.0) + 2.0 * a2 * y;
            return Ok((p, d));
        }
        if y > self.y_cut {
            if !(self.tail_amplitude > 0.0) {
                return Err(FracError::domain("profile tail is not fitted"));
            }
            let base = self.tail_amplitude * y.powf(s - 0.5) * (-y).exp();
            return Ok((base, base * ((s - 0.5) / y - 1.0)));
        }
        let i = self.mesh.partition_point(|&m| m <= y).saturating_sub(1).min(self.mesh.len() - 2);
        let (y0, y1) = (self.mesh[i], self.mesh[i + 1]);
        let j0 = self.jet(y0, self.phi[i], self.dphi[i]);
        let j1 = self.jet(y1, self.phi[i + 1], self.dphi[i + 1]);
        let h = y1 - y0;
        let t = (y - y0) / h;
        Ok((
            hermite5(t, h, [j0[0], j0[1], j0[2]], [j1[0], j1[1], j1[2]]),
            hermite5(t, h, [j0[1], j0[2], j0[3]], [j1[1], j1[2], j1[3]]),
        ))
    }

    /// Tail integral `∫_{y_cut}^∞ A² e^{-2y} dy`, which equals `∫Φ² y^{1-2s}`
    /// over the tail exactly and `∫Φ'² y^{1-2s}` to leading order.
    fn tail_integral(&self) -> f64 {
        0.5 * self.tail_amplitude.powi(2) * (-2.0 * self.y_cut).exp()
    }
}

/// Quintic Hermite interpolant from value, first and second derivative at
/// both ends of an interval of length `h`.
fn hermite5(t: f64, h: f64, left: [f64; 3], right: [f64; 3]) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    let h3 = 0.5 * (t3 - 2.0 * t4 + t5);
    let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    h0 * left[0] + h * (h1 * left[1] + h4 * right[1]) + h * h * (h2 * left[2] + h3 * right[2]) + h5 * right[0]
}

/// `𝒦(Φ_s) = ∫_0^∞ (Φ² + Φ'²) y^{1-2s} dy`; equals `k_s`.
///
/// Log-variable trapezoid on the mesh. The head `(0, y_min)` is integrated
/// in `τ = y^{2s}`, where the leading integrand is constant; the tail uses
/// the fitted exponential.
pub fn profile_energy(table: &ProfileTable) -> f64 {
    let s = table.s;
    let vals: Vec<f64> = table
        .mesh
        .iter()
        .zip(table.phi.iter().zip(&table.dphi))
        .map(|(&y, (&p, &d))| (p * p + d * d) * y.powf(1.0 - 2.0 * s))
        .collect();
    let y0 = table.mesh[0];
    let head = y0.powf(2.0 - 2.0 * s) / (2.0 - 2.0 * s) + table.k_s.powi(2) * y0.powf(2.0 * s) / (2.0 * s);
    head + log_trapezoid(&table.mesh, &vals) + 2.0 * table.tail_integral()
}

/// `∫_0^∞ Φ_s² y^{1-2s} dy`; equals `s·k_s`.
pub fn profile_weighted_mass(table: &ProfileTable) -> f64 {
    let s = table.s;
    let vals: Vec<f64> = table.mesh.iter().zip(&table.phi).map(|(&y, &p)| p * p * y.powf(1.0 - 2.0 * s)).collect();
    let y0 = table.mesh[0];
    let head = y0.powf(2.0 - 2.0 * s) / (2.0 - 2.0 * s);
    head + log_trapezoid(&table.mesh, &vals) + table.tail_integral()
}

/// ODE residual at interior nodes.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OdeResidual {
    /// Largest `|Φ'' + ((1-2s)/y)Φ' - Φ|`.
    pub max_abs: f64,
    /// Largest residual relative to `1 + |Φ''| + |(1-2s)Φ'/y| + |Φ|`.
    pub max_scaled: f64,
    /// Node of the largest scaled residual.
    pub worst_y: f64,
}

/// Residual of the profile ODE with `Φ''` from a quartic fit through five
/// neighbouring `Φ'` samples (independent of the ODE used for interpolation).
pub fn ode_residual(table: &ProfileTable, y_from: f64) -> OdeResidual {
    let s = table.s;
    let mut out = OdeResidual { max_abs: 0.0, max_scaled: 0.0, worst_y: f64::NAN };
    let m = &table.mesh;
    for i in 2..m.len().saturating_sub(2) {
        let y = m[i];
        if y < y_from {
            continue;
        }
        let xs = &m[i - 2..=i + 2];
        let fs = &table.dphi[i - 2..=i + 2];
        let dd = lagrange_derivative(xs, fs, y);
        let drift = (1.0 - 2.0 * s) / y * table.dphi[i];
        let r = (dd + drift - table.phi[i]).abs();
        let scaled = r / (1.0 + dd.abs() + drift.abs() + table.phi[i].abs());
        out.max_abs = out.max_abs.max(r);
        if scaled > out.max_scaled {
            out.max_scaled = scaled;
            out.worst_y = y;
        }
    }
    out
}

/// Derivative at `x` of the interpolating polynomial through `(xs, fs)`.
fn lagrange_derivative(xs: &[f64], fs: &[f64], x: f64) -> f64 {
    let n = xs.len();
    let mut total = 0.0;
    for j in 0..n {
        let mut denom = 1.0;
        for k in 0..n {
            if k != j {
                denom *= xs[j] - xs[k];
            }
        }
        // d/dx Π_{k≠j}(x - x_k)
        let mut deriv = 0.0;
        for l in 0..n {
            if l == j {
                continue;
            }
            let prod: f64 = xs.iter().enumerate().filter(|&(k, _)| k != j && k != l).map(|(_, &xk)| x - xk).product();
            deriv += prod;
        }
        total += fs[j] * deriv / denom;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_arguments() {
        assert!(compute_profile(1.2, 30.0, 100.0).is_err());
        assert!(compute_profile(0.5, 10.0, 100.0).is_err());
        assert!(compute_profile(0.5, 30.0, 1.0).is_err());
    }

    #[test]
    fn half_order_table_matches_exponential() {
        let t = compute_profile(0.5, 30.0, 50.0).unwrap();
        for &y in &[1e-12, 1e-9, 3.3e-4, 0.77, 5.0, 29.9, 35.0] {
            let (p, d) = t.eval(y).unwrap();
            let e = (-y).exp();
            assert!((p - e).abs() < 1e-10 * e.max(1e-3), "y={y}: {p} vs {e}");
            assert!((d + e).abs() < 1e-8 * e.max(1e-3), "y={y}: {d} vs {}", -e);
        }
        assert!((t.tail_amplitude - 1.0).abs() < 1e-10);
    }

    #[test]
    fn series_and_quadrature_agree_at_switch() {
        for &s in &[0.1, 0.3, 0.5, 0.8] {
            let c = c1(s).unwrap();
            for &y in &[0.05, SERIES_SWITCH, 0.6] {
                let (p, d) = frobenius(s, c, y);
                let (q, e) = crate::bessel_profile::profile_direct(s, y).unwrap();
                assert!((p - q).abs() < 1e-13, "s={s} y={y}: {p} vs {q}");
                assert!((d - e).abs() < 1e-12 * e.abs(), "s={s} y={y}: {d} vs {e}");
            }
        }
    }

    #[test]
    fn negative_argument_is_rejected() {
        let t = compute_profile(0.5, 30.0, 20.0).unwrap();
        assert!(t.eval(-1.0).is_err());
    }

    #[test]
    fn lagrange_derivative_exact_for_quartic() {
        let xs = [0.1f64, 0.3, 0.35, 0.9, 1.4];
        let fs: Vec<f64> = xs.iter().map(|x| x.powi(4) - 2.0 * x).collect();
        let d = lagrange_derivative(&xs, &fs, 0.35);
        assert!((d - (4.0 * 0.35f64.powi(3) - 2.0)).abs() < 1e-12);
    }
}
