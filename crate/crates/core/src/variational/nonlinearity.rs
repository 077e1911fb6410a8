//! Nonlinearities `f` with primitive `F(t) = ∫₀ᵗ f` and derivative `f'`.

use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::spectral_core::OperatorParams;

/// Supported right-hand sides of `(-Δ+m²)^s u = f(u)`.
///
/// All are odd in `t`, so `F` is even and `f(0) = F(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Nonlinearity {
    /// `f(t) = c t³/(1+t²)`, asymptotically linear with slope `c`.
    Model { c: f64 },
    /// `f(t) = |t|^{p-2} t`.
    Power { p: f64 },
    /// `f(t) = |t|^{α-1} t + |t|^{γ-1} t`.
    PowerSum { alpha: f64, gamma: f64 },
    /// `f(t) = t ln(1+|t|)`.
    LogLin,
}

impl Nonlinearity {
    /// Rejects parameters for which the formulas are meaningless.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Nonlinearity::Model { c } if !(c.is_finite() && c > 0.0) => {
                Err(FracError::config(format!("model coefficient c must be positive, got {c}")))
            }
            Nonlinearity::Power { p } if !(p.is_finite() && p >= 2.0) => {
                Err(FracError::config(format!("power exponent p must be ≥ 2, got {p}")))
            }
            Nonlinearity::PowerSum { alpha, gamma }
                if !(alpha.is_finite() && gamma.is_finite() && alpha > 1.0 && gamma > 1.0) =>
            {
                Err(FracError::config(format!("power-sum exponents must exceed 1, got alpha={alpha}, gamma={gamma}")))
            }
            _ => Ok(()),
        }
    }

    pub fn f(&self, t: f64) -> f64 {
        match *self {
            Nonlinearity::Model { c } => {
                let t2 = t * t;
                c * t * t2 / (1.0 + t2)
            }
            Nonlinearity::Power { p } => t.abs().powf(p - 2.0) * t,
            Nonlinearity::PowerSum { alpha, gamma } => {
                let a = t.abs();
                (a.powf(alpha - 1.0) + a.powf(gamma - 1.0)) * t
            }
            Nonlinearity::LogLin => t * t.abs().ln_1p(),
        }
    }

    /// `F(t) = ∫₀ᵗ f`.
    pub fn primitive(&self, t: f64) -> f64 {
        match *self {
            Nonlinearity::Model { c } => {
                let x = t * t;
                // x/2 - ln(1+x)/2 cancels to O(x²) near 0
                if x < 1e-3 {
                    c * x * x * (0.25 - x * (1.0 / 6.0 - x * (0.125 - x * 0.1)))
                } else {
                    0.5 * c * (x - x.ln_1p())
                }
            }
            Nonlinearity::Power { p } => t.abs().powf(p) / p,
            Nonlinearity::PowerSum { alpha, gamma } => {
                let a = t.abs();
                a.powf(alpha + 1.0) / (alpha + 1.0) + a.powf(gamma + 1.0) / (gamma + 1.0)
            }
            Nonlinearity::LogLin => {
                let a = t.abs();
                if a < 1e-2 {
                    // a³/3 - a⁴/8 + a⁵/15 - a⁶/24 + a⁷/35
                    a * a * a * (1.0 / 3.0 - a * (0.125 - a * (1.0 / 15.0 - a * (1.0 / 24.0 - a / 35.0))))
                } else {
                    0.5 * (a * a - 1.0) * a.ln_1p() - 0.25 * a * a + 0.5 * a
                }
            }
        }
    }

    /// `f'(t)`.
    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            Nonlinearity::Model { c } => {
                let t2 = t * t;
                let d = 1.0 + t2;
                c * t2 * (t2 + 3.0) / (d * d)
            }
            Nonlinearity::Power { p } => {
                if p == 2.0 {
                    1.0
                } else {
                    (p - 1.0) * t.abs().powf(p - 2.0)
                }
            }
            Nonlinearity::PowerSum { alpha, gamma } => {
                let a = t.abs();
                alpha * a.powf(alpha - 1.0) + gamma * a.powf(gamma - 1.0)
            }
            Nonlinearity::LogLin => {
                let a = t.abs();
                a.ln_1p() + a / (1.0 + a)
            }
        }
    }

    /// `k = lim_{t→∞} f(t)/t`; infinite for superlinear `f`.
    pub fn asymptotic_slope(&self) -> f64 {
        match *self {
            Nonlinearity::Model { c } => c,
            Nonlinearity::Power { p: 2.0 } => 1.0,
            _ => f64::INFINITY,
        }
    }

    /// `lim_{t→0} f(t)/t`.
    pub fn slope_at_zero(&self) -> f64 {
        match *self {
            Nonlinearity::Power { p: 2.0 } => 1.0,
            _ => 0.0,
        }
    }

    /// Growth pair `(p, C)` with `|f(t)| ≤ ε|t| + C|t|^{p-1}` and
    /// `|F(t)| ≤ ε t² + C|t|^p`, for every `ε > 0`.
    ///
    /// For the power sum `C` is an upper bound only on `|t| ≥ 1`; the
    /// small-`t` part is absorbed into `ε`.
    pub fn growth(&self) -> (f64, f64) {
        match *self {
            Nonlinearity::Model { c } => (4.0, c),
            Nonlinearity::Power { p } => (p, 1.0),
            Nonlinearity::PowerSum { alpha, gamma } => (alpha.max(gamma) + 1.0, 2.0),
            Nonlinearity::LogLin => (3.0, 1.0),
        }
    }

    /// Entry check for the ground-state solver: `f'(0)=0` and
    /// `lim f(t)/t = k > m^{2s}`.
    pub fn check_solver_hypotheses(&self, params: &OperatorParams) -> Result<()> {
        self.validate()?;
        let threshold = params.m.powf(2.0 * params.s);
        if self.slope_at_zero() != 0.0 {
            return Err(FracError::config(format!(
                "(f2) violated: lim f(t)/t at 0 is {} (must be 0)",
                self.slope_at_zero()
            )));
        }
        let k = self.asymptotic_slope();
        if !(k > threshold) {
            return Err(FracError::config(format!("(f2) violated: lim f(t)/t = {k} must exceed m^(2s) = {threshold}")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central_diff<F: Fn(f64) -> f64>(g: F, t: f64) -> f64 {
        let e = 1e-5 * (1.0 + t.abs());
        (g(t + e) - g(t - e)) / (2.0 * e)
    }

    #[test]
    fn primitive_and_derivative_are_consistent() {
        let all = [
            Nonlinearity::Model { c: 2.0 },
            Nonlinearity::Power { p: 3.0 },
            Nonlinearity::PowerSum { alpha: 1.5, gamma: 2.5 },
            Nonlinearity::LogLin,
        ];
        for nl in all {
            assert_eq!(nl.f(0.0), 0.0);
            assert_eq!(nl.primitive(0.0), 0.0);
            for &t in &[-3.0, -0.7, -0.02, 0.005, 0.02, 0.3, 1.0, 4.0] {
                let df = central_diff(|x| nl.primitive(x), t);
                assert!((df - nl.f(t)).abs() < 1e-7 * (1.0 + nl.f(t).abs()), "{nl:?} F' at {t}");
                let d2 = central_diff(|x| nl.f(x), t);
                assert!((d2 - nl.derivative(t)).abs() < 1e-6 * (1.0 + d2.abs()), "{nl:?} f' at {t}");
            }
        }
    }

    #[test]
    fn series_branches_match_closed_forms() {
        let m = Nonlinearity::Model { c: 1.0 };
        let x: f64 = 0.0316 * 0.0316;
        assert!((m.primitive(0.0316) - 0.5 * (x - x.ln_1p())).abs() < 1e-15);
        let a: f64 = 0.0099;
        let closed = 0.5 * (a * a - 1.0) * a.ln_1p() - 0.25 * a * a + 0.5 * a;
        assert!((Nonlinearity::LogLin.primitive(a) - closed).abs() < 1e-15);
    }

    #[test]
    fn solver_entry_rejects_weak_model() {
        let p = OperatorParams::new(1, 0.5, 1.0).unwrap();
        assert!(Nonlinearity::Model { c: 2.0 }.check_solver_hypotheses(&p).is_ok());
        let err = Nonlinearity::Model { c: 0.9 }.check_solver_hypotheses(&p).unwrap_err();
        assert!(err.to_string().contains("(f2)"));
        assert!(Nonlinearity::Power { p: 2.0 }.check_solver_hypotheses(&p).is_err());
    }

    #[test]
    fn serde_uses_kind_tag() {
        let nl: Nonlinearity = serde_json::from_str(r#"{"kind":"model","c":2.0}"#).unwrap();
        assert_eq!(nl, Nonlinearity::Model { c: 2.0 });
        let s = serde_json::to_string(&Nonlinearity::LogLin).unwrap();
        assert_eq!(s, r#"{"kind":"log_lin"}"#);
    }
}
