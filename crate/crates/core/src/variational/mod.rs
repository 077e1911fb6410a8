//! Variational structure of `(-Δ+m²)^s u = f(u)`: energy, Nehari and
//! Pohozaev functionals, fibering maps, ground states, the non-existence
//! certificate for critical powers, and the `Λ = S` scan.

pub mod fibering;
pub mod functionals;
pub mod ground_state;
pub mod hypotheses;
pub mod nonexistence;
pub mod nonlinearity;
pub mod sobolev;

pub use fibering::{dilate, fibering_derivative, fibering_value, find_t_u, project_to_manifold, Fiber, FiberingResult};
pub use functionals::{
    energy, energy_gap, euler_gradient, nehari_defect, nehari_pohozaev_j, nonlinear_work, pohozaev_p,
    potential_integral, PohozaevReport,
};
pub use ground_state::{
    collapse_radius, ground_state_from, ground_state_solve, seed_field, GroundStateResult, SolverOptions, TraceRow,
};
pub use hypotheses::{hypothesis_checks, CheckRow, HypothesisReport, SampleSpec};
pub use nonexistence::{nehari_rescale, nonexistence_certificate, NonexistenceReport};
pub use nonlinearity::Nonlinearity;
pub use sobolev::{box_convergence_study, geometric_t_list, sobolev_quotient_scan, SobolevRow, SobolevScan};
