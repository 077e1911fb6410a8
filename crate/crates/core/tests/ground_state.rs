//! Ground states of the model problem, N = 1 and N = 2.

use fracrel_core::spectral_core::{Grid, OperatorParams};
use fracrel_core::variational::{energy_gap, ground_state_solve, nehari_pohozaev_j, Nonlinearity, SolverOptions};

fn solve(dim: usize, n: usize, length: f64, c: f64, seed: u64) -> fracrel_core::variational::GroundStateResult {
    let params = OperatorParams::new(dim, 0.5, 1.0).unwrap();
    let grid = Grid::new(dim, n, length).unwrap();
    let opts = SolverOptions { seed, ..SolverOptions::default() };
    ground_state_solve(grid, &params, &Nonlinearity::Model { c }, &opts).unwrap()
}

#[test]
fn one_dimensional_ground_state() {
    let a = solve(1, 256, 40.0, 2.0, 1);
    println!(
        "N=1: {} iters, energy {:.10}, grad {:.2e}, poho {:.2e}",
        a.iterations, a.energy, a.grad_norm, a.pohozaev.relative_residual
    );
    assert!(a.converged, "{a:?}");
    assert!(a.energy > 0.0);
    assert!(a.grad_norm < 1e-4 && a.nehari_defect.abs() < 1e-4 && a.manifold_defect.abs() < 1e-4);
    assert!(a.pohozaev.relative_residual.abs() < 1e-3);
    assert!(a.positive && a.boundary_ratio < 1e-4);
    // on the manifold the energy gap is the energy
    let params = OperatorParams::new(1, 0.5, 1.0).unwrap();
    let nl = Nonlinearity::Model { c: 2.0 };
    let gap = energy_gap(&a.field, &params, &nl).unwrap();
    let j = nehari_pohozaev_j(&a.field, &params, &nl).unwrap();
    assert!((gap - (a.energy - j / 4.0)).abs() < 1e-10);

    let b = solve(1, 256, 40.0, 2.0, 2);
    assert!((a.energy - b.energy).abs() < 1e-4, "{} vs {}", a.energy, b.energy);
}

#[test]
fn larger_coupling_lowers_the_level() {
    let a = solve(1, 256, 40.0, 2.0, 1);
    let b = solve(1, 256, 40.0, 3.0, 1);
    println!("level c=2: {:.6}, c=3: {:.6}", a.energy, b.energy);
    assert!(b.converged);
}

#[test]
fn two_dimensional_ground_state() {
    let a = solve(2, 128, 32.0, 2.0, 1);
    println!(
        "N=2: {} iters, energy {:.10}, grad {:.2e}, poho {:.2e}",
        a.iterations, a.energy, a.grad_norm, a.pohozaev.relative_residual
    );
    assert!(a.converged);
    assert!(a.energy > 0.0 && a.positive);
    assert!(a.pohozaev.relative_residual.abs() < 1e-3);
}
