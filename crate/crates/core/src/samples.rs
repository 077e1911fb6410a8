//! Seeded test fields shared by the verification suite and the tests.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FracError, Result};
use crate::spectral_core::{Field, Grid};

/// Random real trigonometric polynomial with every integer mode `|k_a| ≤ band`
/// present; amplitudes decay like `1/(1+|k|²)`.
pub fn random_band_limited(grid: Grid, band: usize, seed: u64) -> Result<Field> {
    if 2 * band >= grid.n() {
        return Err(FracError::config(format!("band {band} is not resolved by {} points per axis", grid.n())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = grid.dim();
    let b = band as i64;
    let side = 2 * band + 1;
    let modes: Vec<([i64; 3], f64, f64)> = (0..side.pow(dim as u32))
        .map(|mut flat| {
            let mut k = [0i64; 3];
            for v in k.iter_mut().take(dim) {
                *v = (flat % side) as i64 - b;
                flat /= side;
            }
            let k2: i64 = k.iter().map(|v| v * v).sum();
            let amp = rng.gen_range(-1.0..1.0) / (1.0 + k2 as f64);
            (k, amp, rng.gen_range(0.0..2.0 * PI))
        })
        .collect();
    let l = grid.length();
    Field::from_fn(grid, |x| {
        modes
            .iter()
            .map(|(k, amp, phase)| {
                let arg: f64 = x.iter().zip(k).map(|(xi, ki)| xi * *ki as f64).sum();
                amp * (2.0 * PI * arg / l + phase).cos()
            })
            .sum()
    })
}

/// Sum of `count` Gaussian bumps with random sign, amplitude in `[0.5, 2]`,
/// width in `[0.6, 1.4]` and centre within `reach` of the origin.
pub fn random_bumps(grid: Grid, count: usize, reach: f64, positive: bool, seed: u64) -> Result<Field> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = grid.dim();
    let bumps: Vec<([f64; 3], f64, f64)> = (0..count)
        .map(|_| {
            let mut c = [0.0; 3];
            for v in c.iter_mut().take(dim) {
                *v = rng.gen_range(-reach..=reach);
            }
            let sign = if positive || rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            (c, sign * rng.gen_range(0.5..2.0), rng.gen_range(0.6..1.4))
        })
        .collect();
    Field::from_fn(grid, |x| {
        bumps
            .iter()
            .map(|(c, a, w)| {
                let r2: f64 = x.iter().zip(c).map(|(p, q)| (p - q) * (p - q)).sum();
                a * (-r2 / (w * w)).exp()
            })
            .sum()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_limited_field_has_compact_spectrum() {
        let g = Grid::new(2, 32, 6.0).unwrap();
        let u = random_band_limited(g, 3, 5).unwrap();
        for (k, c) in u.spectral().iter().enumerate() {
            let idx = g.unravel(k);
            let outside = idx[..2].iter().any(|&j| g.freq_index(j).abs() > 3);
            if outside {
                assert!(c.norm() < 1e-10, "mode {k}");
            }
        }
        assert_eq!(u, random_band_limited(g, 3, 5).unwrap());
    }

    #[test]
    fn bumps_are_seeded() {
        let g = Grid::new(1, 64, 20.0).unwrap();
        let a = random_bumps(g, 3, 2.0, true, 9).unwrap();
        assert!(a.values().iter().all(|&v| v >= 0.0));
        assert_eq!(a, random_bumps(g, 3, 2.0, true, 9).unwrap());
    }
}
