//! Sampled checks of the structural hypotheses on `f`.

use serde::{Deserialize, Serialize};

use crate::spectral_core::OperatorParams;
use crate::variational::nonlinearity::Nonlinearity;

/// Sample layout: `t` geometric on `[t_min, t_max]`, pairs `(τ, u)` on a
/// uniform product of `tau_range × u_range`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub t_count: usize,
    pub tau_range: (f64, f64),
    pub u_range: (f64, f64),
    pub pair_count: usize,
    /// `ε` in `|f(t)| ≤ ε|t| + C_ε|t|^{p-1}`.
    pub epsilon: f64,
    /// Start of the window in which `tf - 2F` must grow.
    pub f3_from: f64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec {
            t_min: 1e-3,
            t_max: 1e3,
            t_count: 241,
            tau_range: (0.1, 10.0),
            u_range: (-5.0, 5.0),
            pair_count: 41,
            epsilon: 0.5,
            f3_from: 10.0,
        }
    }
}

/// One inequality over all samples; `worst_margin < 0` marks a violation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckRow {
    pub holds: bool,
    pub samples: usize,
    pub violations: usize,
    pub worst_margin: f64,
}

impl CheckRow {
    pub(crate) fn from_margins(margins: impl Iterator<Item = f64>) -> Self {
        let mut samples = 0;
        let mut violations = 0;
        let mut worst = f64::INFINITY;
        for m in margins {
            samples += 1;
            if m < 0.0 {
                violations += 1;
            }
            worst = worst.min(m);
        }
        CheckRow { holds: violations == 0, samples, violations, worst_margin: worst }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub nonlinearity: Nonlinearity,
    /// `f(t)/t` strictly increasing on `t > 0`.
    pub f1_monotone: CheckRow,
    /// `k = lim f(t)/t` and whether `k > m^{2s}`.
    pub f2_slope: f64,
    pub f2_threshold: f64,
    pub f2_holds: bool,
    /// `tf(t) - 2F(t)` increasing on `[f3_from, t_max]`.
    pub f3_growth: CheckRow,
    /// `tf(t) - 2F(t) > 0` for `t ≠ 0`.
    pub superquadratic: CheckRow,
    /// `τ²/2 f(u)u - F(τu) ≤ f(u)u/2 - F(u)`.
    pub lemma_pair: CheckRow,
    /// Smallest `C_ε` making the growth bound hold at every sample, and the
    /// growth exponent `p` it refers to.
    pub growth_exponent: f64,
    pub growth_c_eps: f64,
}

/// Evaluates every inequality on the samples of `spec`; violations are
/// reported, never raised.
pub fn hypothesis_checks(nl: &Nonlinearity, params: &OperatorParams, spec: &SampleSpec) -> HypothesisReport {
    let ts: Vec<f64> = (0..spec.t_count)
        .map(|i| spec.t_min * (spec.t_max / spec.t_min).powf(i as f64 / (spec.t_count - 1).max(1) as f64))
        .collect();
    let ratio = |t: f64| nl.f(t) / t;
    let f1_monotone = CheckRow::from_margins(ts.windows(2).map(|w| ratio(w[1]) - ratio(w[0])));
    let sq = |t: f64| t * nl.f(t) - 2.0 * nl.primitive(t);
    let superquadratic = CheckRow::from_margins(ts.iter().flat_map(|&t| [sq(t), sq(-t)]));
    let tail: Vec<f64> = ts.iter().cloned().filter(|&t| t >= spec.f3_from).collect();
    let f3_growth = CheckRow::from_margins(tail.windows(2).map(|w| sq(w[1]) - sq(w[0])));

    let pc = spec.pair_count.max(2);
    let lin = |r: (f64, f64), i: usize| r.0 + (r.1 - r.0) * i as f64 / (pc - 1) as f64;
    let mut pairs = Vec::with_capacity(pc * pc);
    for i in 0..pc {
        for j in 0..pc {
            pairs.push((lin(spec.tau_range, i), lin(spec.u_range, j)));
        }
    }
    let lemma_pair = CheckRow::from_margins(pairs.iter().map(|&(tau, u)| {
        let fu = nl.f(u) * u;
        let rhs = 0.5 * fu - nl.primitive(u);
        let lhs = 0.5 * tau * tau * fu - nl.primitive(tau * u);
        // equality at τ = 1 up to rounding
        rhs - lhs + 1e-12 * (1.0 + lhs.abs() + rhs.abs())
    }));

    let (p, _) = nl.growth();
    let growth_c_eps =
        ts.iter().map(|&t| ((nl.f(t).abs() - spec.epsilon * t) / t.powf(p - 1.0)).max(0.0)).fold(0.0, f64::max);

    let threshold = params.m.powf(2.0 * params.s);
    HypothesisReport {
        nonlinearity: *nl,
        f1_monotone,
        f2_slope: nl.asymptotic_slope(),
        f2_threshold: threshold,
        f2_holds: nl.slope_at_zero() == 0.0 && nl.asymptotic_slope() > threshold,
        f3_growth,
        superquadratic,
        lemma_pair,
        growth_exponent: p,
        growth_c_eps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_satisfies_everything() {
        let p = OperatorParams::new(1, 0.5, 1.0).unwrap();
        let r = hypothesis_checks(&Nonlinearity::Model { c: 2.0 }, &p, &SampleSpec::default());
        assert!(r.f1_monotone.holds && r.superquadratic.holds && r.f3_growth.holds);
        assert!(r.lemma_pair.holds && r.f2_holds);
        assert!(r.growth_c_eps <= 2.0);
    }

    #[test]
    fn linear_power_fails_f1_strictly() {
        let p = OperatorParams::new(1, 0.5, 1.0).unwrap();
        let r = hypothesis_checks(&Nonlinearity::Power { p: 2.0 }, &p, &SampleSpec::default());
        assert!(!r.f2_holds);
        let r3 = hypothesis_checks(&Nonlinearity::Power { p: 3.0 }, &p, &SampleSpec::default());
        assert!(r3.f1_monotone.holds && r3.f1_monotone.worst_margin > 0.0);
    }
}
