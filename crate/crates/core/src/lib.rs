//! Certification of entropy-dissipation rates for weakly self-consistent
//! kinetic Fokker-Planck models, plus the numerical machinery to test the
//! certificates: a Gibbs fixed-point solver, a phase-space PDE solver and
//! an interacting particle system.

pub mod cli;
pub mod config;
pub mod equilibrium;
pub mod error;
pub mod infomatrix;
pub mod io;
pub mod kinetic;
pub mod model;
pub mod particles;

pub use error::{Error, Result};
