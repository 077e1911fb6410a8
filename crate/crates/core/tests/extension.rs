//! Extension-side identities on random fields.

use fracrel_core::bessel_profile::{compute_profile, DEFAULT_MESH_DENSITY, DEFAULT_Y_CUT};
use fracrel_core::extension_solver::{
    extend, extension_pohozaev_residual, neumann_trace, trace_extrapolation_error, weighted_energy, weighted_mass,
    YMesh,
};
use fracrel_core::samples::{random_band_limited, random_bumps};
use fracrel_core::spectral_core::{apply_multiplier, hs_norm_sq, low_order_mass, lp_norm, Grid, OperatorParams};
use fracrel_core::variational::{ground_state_solve, pohozaev_p, Nonlinearity, SolverOptions};

#[test]
fn energy_mass_and_trace_on_random_fields() {
    for &s in &[0.25, 0.3, 0.5, 0.75] {
        let table = compute_profile(s, DEFAULT_Y_CUT, DEFAULT_MESH_DENSITY).unwrap();
        for (dim, n, len) in [(1, 64, 8.0), (2, 32, 6.0)] {
            let p = OperatorParams::new(dim, s, 1.0).unwrap();
            let grid = Grid::new(dim, n, len).unwrap();
            let mesh = YMesh::default_for(&p);
            for seed in 0..3 {
                let u = random_band_limited(grid, 6, seed).unwrap();
                let w = extend(&u, &p, &table, &mesh).unwrap();
                let er = weighted_energy(&w) / (table.k_s() * hs_norm_sq(&u, &p).unwrap());
                let mr = weighted_mass(&w) / (s * table.k_s() * low_order_mass(&u, &p).unwrap());
                assert!((er - 1.0).abs() < 1e-4, "s={s} N={dim}: energy ratio {er}");
                assert!((mr - 1.0).abs() < 1e-4, "s={s} N={dim}: mass ratio {mr}");
                let tr = neumann_trace(&w).unwrap();
                let op = apply_multiplier(&u, &p, s).unwrap().scaled(table.k_s());
                let diff = tr.axpy(-1.0, &op).unwrap();
                let rel = lp_norm(&diff, 2.0).unwrap() / lp_norm(&op, 2.0).unwrap();
                assert!(rel < 1e-3, "s={s} N={dim}: trace {rel:e}");
                assert!(trace_extrapolation_error(&w).unwrap() < 1e-8);
            }
        }
    }
}

#[test]
fn first_layer_reproduces_boundary_field() {
    // at y₁ = 1e-6 the layer differs from u by ~c₁(c y₁)^{2s}
    let s = 0.75;
    let table = compute_profile(s, DEFAULT_Y_CUT, DEFAULT_MESH_DENSITY).unwrap();
    let p = OperatorParams::new(1, s, 1.0).unwrap();
    let u = random_band_limited(Grid::new(1, 64, 8.0).unwrap(), 6, 4).unwrap();
    let mesh = YMesh::geometric(1e-6, 50.0, 200).unwrap();
    let w = extend(&u, &p, &table, &mesh).unwrap();
    let layer = w.layer(0).unwrap();
    let rel = lp_norm(&layer.axpy(-1.0, &u).unwrap(), 2.0).unwrap() / lp_norm(&u, 2.0).unwrap();
    assert!(rel < 1e-6, "{rel:e}");
}

#[test]
fn extension_pohozaev_is_k_s_times_the_boundary_identity() {
    let nl = Nonlinearity::Model { c: 2.0 };
    for &s in &[0.25, 0.5, 0.75] {
        let table = compute_profile(s, DEFAULT_Y_CUT, DEFAULT_MESH_DENSITY).unwrap();
        let p = OperatorParams::new(2, s, 1.0).unwrap();
        let grid = Grid::new(2, 64, 16.0).unwrap();
        let u = random_bumps(grid, 3, 2.0, false, 11).unwrap();
        let w = extend(&u, &p, &table, &YMesh::default_for(&p)).unwrap();
        let ext = extension_pohozaev_residual(&w, &u, &nl).unwrap();
        let base = pohozaev_p(&u, &p, &nl).unwrap();
        let rel = (ext.lhs() - table.k_s() * base.lhs()).abs() / (table.k_s() * base.lhs());
        assert!(rel < 1e-4, "s={s}: {rel:e}");
        assert!(
            (ext.rhs_potential_term - table.k_s() * base.rhs_potential_term).abs()
                < 1e-12 * ext.rhs_potential_term.abs()
        );
        // a random field is not a solution
        assert!(ext.relative_residual.abs() > 1e-2);
    }
}

#[test]
fn extension_pohozaev_at_a_ground_state() {
    let p = OperatorParams::new(1, 0.5, 1.0).unwrap();
    let nl = Nonlinearity::Model { c: 2.0 };
    let gs = ground_state_solve(Grid::new(1, 256, 40.0).unwrap(), &p, &nl, &SolverOptions::default()).unwrap();
    let table = compute_profile(0.5, DEFAULT_Y_CUT, DEFAULT_MESH_DENSITY).unwrap();
    let w = extend(&gs.field, &p, &table, &YMesh::default_for(&p)).unwrap();
    let r = extension_pohozaev_residual(&w, &gs.field, &nl).unwrap();
    assert!(r.relative_residual.abs() < 1e-2, "{r:?}");
}
