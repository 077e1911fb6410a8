//! Property tests over random parameters and fields.

use proptest::prelude::*;

use fracrel_core::bessel_profile::{c1, compute_profile, k_s, DEFAULT_MESH_DENSITY, DEFAULT_Y_CUT};
use fracrel_core::extension_solver::{extend, weighted_energy, weighted_mass, YMesh};
use fracrel_core::samples::{random_band_limited, random_bumps};
use fracrel_core::spectral_core::{
    apply_multiplier, hs_inner, hs_norm_sq, l2_inner, low_order_mass, lp_norm, Field, Grid, OperatorParams,
};
use fracrel_core::symmetry_tools::{kernel_antisymmetry_check, reflect_field, HalfSpace, ReflectionSpec};
use fracrel_core::variational::fibering::{dilate, project_to_manifold};
use fracrel_core::variational::{
    energy, energy_gap, euler_gradient, nehari_defect, nehari_pohozaev_j, pohozaev_p, Fiber, Nonlinearity,
};

fn rel_l2(a: &Field, b: &Field) -> f64 {
    lp_norm(&a.axpy(-1.0, b).unwrap(), 2.0).unwrap() / lp_norm(b, 2.0).unwrap()
}

prop_compose! {
    fn operator()(dim in 1usize..=2, s in 0.05f64..0.95, m in 0.3f64..3.0) -> OperatorParams {
        OperatorParams::new(dim, s, m).unwrap()
    }
}

fn grid_for(p: &OperatorParams, n: usize, length: f64) -> Grid {
    Grid::new(p.dim, n, length).unwrap()
}

fn nonlinearity() -> impl Strategy<Value = Nonlinearity> {
    prop_oneof![
        (1.2f64..4.0).prop_map(|c| Nonlinearity::Model { c }),
        (2.2f64..5.0).prop_map(|p| Nonlinearity::Power { p }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fourier_modes_are_eigenfunctions(p in operator(), k in 0i64..15, sigma in -1.0f64..1.0, length in 2.0f64..20.0) {
        let grid = grid_for(&p, 32, length);
        let wave = Field::from_fn(grid, |x| {
            let arg: f64 = x.iter().map(|v| k as f64 * v).sum();
            (2.0 * std::f64::consts::PI * arg / length).cos()
        }).unwrap();
        let q = p.dim as f64 * (k as f64 / length).powi(2);
        let lu = apply_multiplier(&wave, &p, sigma).unwrap();
        prop_assert!(rel_l2(&lu, &wave.scaled(p.symbol(q).powf(sigma))) < 1e-12);
    }

    #[test]
    fn multipliers_compose(p in operator(), a in -1.0f64..1.0, b in -1.0f64..1.0, seed in 0u64..1000) {
        let u = random_band_limited(grid_for(&p, 32, 8.0), 5, seed).unwrap();
        let chained = apply_multiplier(&apply_multiplier(&u, &p, a).unwrap(), &p, b).unwrap();
        prop_assert!(rel_l2(&chained, &apply_multiplier(&u, &p, a + b).unwrap()) < 1e-12);
    }

    #[test]
    fn multipliers_are_self_adjoint(p in operator(), sigma in -1.0f64..1.0, seed in 0u64..1000) {
        let grid = grid_for(&p, 32, 8.0);
        let u = random_band_limited(grid, 5, seed).unwrap();
        let v = random_band_limited(grid, 5, seed + 1).unwrap();
        let a = l2_inner(&apply_multiplier(&u, &p, sigma).unwrap(), &v).unwrap();
        let b = l2_inner(&u, &apply_multiplier(&v, &p, sigma).unwrap()).unwrap();
        let scale = lp_norm(&apply_multiplier(&u, &p, sigma).unwrap(), 2.0).unwrap() * lp_norm(&v, 2.0).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * scale);
    }

    #[test]
    fn hs_inner_is_symmetric_and_bounded_below(p in operator(), seed in 0u64..1000) {
        let grid = grid_for(&p, 32, 8.0);
        let u = random_bumps(grid, 3, 2.0, false, seed).unwrap();
        let v = random_band_limited(grid, 4, seed + 7).unwrap();
        let uv = hs_inner(&u, &v, &p).unwrap();
        let vu = hs_inner(&v, &u, &p).unwrap();
        let scale = (hs_norm_sq(&u, &p).unwrap() * hs_norm_sq(&v, &p).unwrap()).sqrt();
        prop_assert!((uv - vu).abs() <= 1e-12 * scale);
        let uu = hs_inner(&u, &u, &p).unwrap();
        prop_assert!(uu >= p.m.powf(2.0 * p.s) * lp_norm(&u, 2.0).unwrap().powi(2) * (1.0 - 1e-12));
    }

    #[test]
    fn transform_round_trips(p in operator(), seed in 0u64..1000) {
        let u = random_bumps(grid_for(&p, 64, 10.0), 3, 3.0, false, seed).unwrap();
        let back = Field::from_spectral(*u.grid(), u.spectral().to_vec()).unwrap();
        prop_assert!(rel_l2(&back, &u) < 1e-12);
    }

    #[test]
    fn two_s_c1_is_k_s(s in 0.01f64..0.99) {
        let (a, b) = (2.0 * s * c1(s).unwrap(), k_s(s).unwrap());
        prop_assert!((a - b).abs() <= 1e-13 * b);
    }

    #[test]
    fn j_composed_matches_expanded(p in operator(), nl in nonlinearity(), seed in 0u64..1000) {
        let u = random_bumps(grid_for(&p, 32, 10.0), 2, 2.0, false, seed).unwrap();
        let composed = nehari_defect(&u, &p, &nl).unwrap() + 2.0 * pohozaev_p(&u, &p, &nl).unwrap().residual;
        let expanded = nehari_pohozaev_j(&u, &p, &nl).unwrap();
        let scale = hs_norm_sq(&u, &p).unwrap() * (p.dim as f64 + 2.0) + composed.abs();
        prop_assert!((composed - expanded).abs() <= 1e-10 * scale);
    }

    #[test]
    fn fiber_at_one_is_energy_and_j(p in operator(), nl in nonlinearity(), seed in 0u64..1000) {
        let u = random_bumps(grid_for(&p, 32, 10.0), 2, 2.0, true, seed).unwrap();
        let fiber = Fiber::new(&u, &p, &nl).unwrap();
        let scale = hs_norm_sq(&u, &p).unwrap();
        prop_assert!((fiber.value(1.0).unwrap() - energy(&u, &p, &nl).unwrap()).abs() <= 1e-10 * scale);
        prop_assert!((fiber.derivative(1.0).unwrap() - nehari_pohozaev_j(&u, &p, &nl).unwrap()).abs() <= 1e-10 * scale);
    }

    #[test]
    fn energy_gap_is_positive(p in operator(), nl in nonlinearity(), seed in 0u64..1000) {
        let u = random_bumps(grid_for(&p, 32, 10.0), 3, 2.0, false, seed).unwrap();
        prop_assert!(energy_gap(&u, &p, &nl).unwrap() > 0.0);
    }

    #[test]
    fn gradient_matches_finite_differences(p in operator(), nl in nonlinearity(), seed in 0u64..1000) {
        let grid = grid_for(&p, 32, 10.0);
        let u = random_bumps(grid, 2, 2.0, false, seed).unwrap();
        let v = random_band_limited(grid, 4, seed + 3).unwrap();
        let eps = 1e-4;
        let up = energy(&u.axpy(eps, &v).unwrap(), &p, &nl).unwrap();
        let down = energy(&u.axpy(-eps, &v).unwrap(), &p, &nl).unwrap();
        let fd = (up - down) / (2.0 * eps);
        let exact = l2_inner(&euler_gradient(&u, &p, &nl).unwrap(), &v).unwrap();
        let scale = hs_inner(&u, &v, &p).unwrap().abs() + exact.abs() + 1e-3 * hs_norm_sq(&v, &p).unwrap().sqrt();
        prop_assert!((fd - exact).abs() <= 1e-5 * scale, "fd {fd} exact {exact}");
    }

    #[test]
    fn reflection_is_an_involution(p in operator(), offset in -40i64..40, below in any::<bool>(), seed in 0u64..1000) {
        let grid = grid_for(&p, 64, 12.0);
        let u = random_bumps(grid, 3, 3.0, false, seed).unwrap();
        let lambda = offset as f64 * 0.5 * grid.spacing();
        let side = if below { HalfSpace::Below } else { HalfSpace::Above };
        let spec = ReflectionSpec::new(p.dim - 1, lambda, side);
        let back = reflect_field(&reflect_field(&u, &spec).unwrap(), &spec).unwrap();
        prop_assert_eq!(back.values(), u.values());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn dilation_commutes_with_the_fiber(t in 0.5f64..1.5, nl in nonlinearity(), seed in 0u64..1000) {
        let p = OperatorParams::new(1, 0.5, 1.0).unwrap();
        let u = random_bumps(Grid::new(1, 1024, 40.0).unwrap(), 2, 1.5, true, seed).unwrap();
        let fiber = Fiber::new(&u, &p, &nl).unwrap();
        let lhs = Fiber::new(&dilate(&u, t).unwrap(), &p, &nl).unwrap().derivative(1.0).unwrap();
        let rhs = t * fiber.derivative(t).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-6 * hs_norm_sq(&u, &p).unwrap(), "{lhs} vs {rhs}");
    }

    #[test]
    fn fiber_has_one_manifold_point(t in 0.7f64..1.4, seed in 0u64..1000) {
        let p = OperatorParams::new(1, 0.5, 1.0).unwrap();
        let nl = Nonlinearity::Model { c: 2.0 };
        let u = random_bumps(Grid::new(1, 1024, 60.0).unwrap(), 2, 1.5, true, seed).unwrap();
        let (direct, _) = project_to_manifold(&u, &p, &nl).unwrap();
        let (via, _) = project_to_manifold(&dilate(&u, t).unwrap(), &p, &nl).unwrap();
        prop_assert!(rel_l2(&via, &direct) < 1e-6, "{}", rel_l2(&via, &direct));
    }

    #[test]
    fn extension_reproduces_both_norms(s in 0.1f64..0.9, m in 0.5f64..2.0, seed in 0u64..1000) {
        let p = OperatorParams::new(1, s, m).unwrap();
        let table = compute_profile(s, DEFAULT_Y_CUT, DEFAULT_MESH_DENSITY).unwrap();
        let u = random_band_limited(Grid::new(1, 64, 8.0).unwrap(), 5, seed).unwrap();
        let w = extend(&u, &p, &table, &YMesh::default_for(&p)).unwrap();
        let ks = table.k_s();
        let e = weighted_energy(&w) / (ks * hs_norm_sq(&u, &p).unwrap());
        let mass = weighted_mass(&w) / (s * ks * low_order_mass(&u, &p).unwrap());
        prop_assert!((e - 1.0).abs() < 1e-4 && (mass - 1.0).abs() < 1e-4, "energy {e} mass {mass}");
    }

    #[test]
    fn kernel_is_larger_on_the_near_side(s in 0.1f64..0.9, m in 0.5f64..2.0, dim in 1usize..=3, lambda in -2.0f64..2.0, seed in 0u64..1000) {
        let p = OperatorParams::new(dim, s, m).unwrap();
        let r = kernel_antisymmetry_check(&p, lambda, 3.0, 10, seed).unwrap();
        prop_assert_eq!(r.violations, 0);
    }
}
