//! Self-consistent Gibbs state by damped Picard iteration.

use vfplab::equilibrium::{fixed_point, FixedPointOptions, PhaseGrid, DEFAULT_VMAX};
use vfplab::model::{KernelSpec, PositionDomain, PotentialSpec};

fn main() -> vfplab::Result<()> {
    let grid = PhaseGrid::new(PositionDomain::torus(std::f64::consts::TAU, 1)?, 128, 64, DEFAULT_VMAX)?;
    let potential = PotentialSpec::Cosine { kappa: 1.0 };
    for alpha in [0.0, 0.5, -0.5] {
        let eq = fixed_point(&KernelSpec::difference(alpha, 1.0), &potential, &grid, &FixedPointOptions::default())?;
        let peak = eq.rho_inf.iter().copied().fold(0.0, f64::max);
        println!(
            "alpha = {alpha:+.1}: {} iterations, residual {:.1e}, Z = {:.5}, peak density {:.4}, E = {:.6}",
            eq.iterations, eq.residual, eq.z, peak, eq.free_energy
        );
    }
    Ok(())
}
