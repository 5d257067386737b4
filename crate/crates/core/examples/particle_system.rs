//! Interacting particles against the PDE density at the same time.

use vfplab::equilibrium::{fixed_point, FixedPointOptions, PhaseGrid, PhaseGridSpec};
use vfplab::kinetic::{run, InitialCondition, SolverConfig};
use vfplab::model::{KernelSpec, PositionDomain, PotentialSpec};
use vfplab::particles::{marginal_l1, simulate, ParticleConfig};

fn main() -> vfplab::Result<()> {
    let domain = PositionDomain::line(6.0, 1)?;
    let kernel = KernelSpec::difference(0.05, 1.0);
    let potential = PotentialSpec::Quadratic { kappa: 0.9 };
    let spec = PhaseGridSpec { nx: 64, nv: 64, vmax: 6.0 };
    let grid = PhaseGrid::from_spec(domain, &spec)?;
    let eq = fixed_point(&kernel, &potential, &grid, &FixedPointOptions::default())?;

    let initial = InitialCondition::Gaussian { x0: 1.0, sigma_x: 0.8, v0: 0.5, sigma_v: 1.0 };
    let mut cfg = SolverConfig::new(spec, 1e-3, 1.0, initial);
    cfg.snapshot_times = vec![0.0];
    let pde = run(&cfg, &kernel, &potential, &eq)?;
    let f0 = &pde.snapshots[0].1;

    let pcfg = ParticleConfig { n: 10_000, dt: 2e-3, seed: 7, t_end: 1.0, snapshot_times: vec![] };
    let particles = simulate(&pcfg, f0, &kernel, &potential)?;
    let last = particles.snapshots.last().expect("final snapshot");
    let rho = pde.final_state.x_marginal();
    println!("t = {:.1}: L1(particles, PDE) = {:.4}", last.t, marginal_l1(&last.x_marginal, &rho, grid.hx()));
    println!(
        "velocity mean {:.4} (PDE {:.4}), variance {:.4}",
        last.v_mean,
        pde.final_state.mean_velocity(),
        last.v_variance
    );
    Ok(())
}
