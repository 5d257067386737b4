//! Nonlinear Gibbs equilibrium and the Lyapunov functionals evaluated on a
//! phase-space grid.

mod fixed_point;
pub mod functionals;
mod grid;

pub use fixed_point::{fixed_point, Equilibrium, EquilibriumHeader, FixedPointOptions};
pub use functionals::{
    ckp_check, derived_constant, energy_gap_identity, fisher_a, fisher_z, free_energy,
    kernel_sup, kl_divergence, l1_distance, variation, CkpReport, CkpVerdict, EnergyGap,
    EnergyParts, F_FLOOR,
};
pub use grid::{DensityField, ModelTables, PhaseGrid, PhaseGridSpec, DEFAULT_VMAX, MIN_VMAX};
