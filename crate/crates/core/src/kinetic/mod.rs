//! Strang-split solver for the kinetic Fokker–Planck equation in one space
//! dimension, with free-energy and dissipation diagnostics.

pub mod collision;
pub mod diagnostics;
pub mod interp;
mod solver;

pub use diagnostics::{
    check_dissipation_inequality, check_dissipation_inequality_with_tol, check_energy_identity,
    fit_exponential, fit_rate, DiagnosticsRow, DiagnosticsSeries, DissipationReport, DissipationVerdict,
    RateField, RateFit, DE_FLOOR, DISSIPATION_TOL, GAP_FLOOR, ENERGY_INCREASE_TOL,
};
pub use interp::Interpolation;
pub use solver::{run, InitialCondition, KineticSolver, RunOutput, SolverConfig, Transport};
