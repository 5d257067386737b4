//! Relaxation of a displaced Gaussian toward the Gibbs state, measured
//! against the certified rate.

use vfplab::equilibrium::{fixed_point, FixedPointOptions, PhaseGrid, PhaseGridSpec, DEFAULT_VMAX};
use vfplab::infomatrix::{certify_lambda, XyGrid};
use vfplab::kinetic::{check_dissipation_inequality, fit_rate, run, InitialCondition, RateField, SolverConfig};
use vfplab::model::{DirectionPair, KernelSpec, PositionDomain, PotentialSpec};

fn main() -> vfplab::Result<()> {
    let domain = PositionDomain::line(6.0, 1)?;
    let kernel = KernelSpec::difference(0.05, 1.0);
    let potential = PotentialSpec::Quadratic { kappa: 0.9 };
    let dir = DirectionPair::new(1.0, 0.3);
    let lambda = certify_lambda(&kernel, &potential, dir, &XyGrid::new(domain, 32)?)?.lambda;

    let spec = PhaseGridSpec { nx: 64, nv: 64, vmax: DEFAULT_VMAX };
    let eq = fixed_point(&kernel, &potential, &PhaseGrid::from_spec(domain, &spec)?, &FixedPointOptions::default())?;
    let initial = InitialCondition::Gaussian { x0: 1.0, sigma_x: 0.8, v0: 0.5, sigma_v: 1.0 };
    let mut cfg = SolverConfig::new(spec, 1e-3, 5.0, initial);
    cfg.dir = dir;
    cfg.stride = 50;
    let out = run(&cfg, &kernel, &potential, &eq)?;

    println!("{:>5} {:>12} {:>12} {:>10}", "t", "E - E_inf", "DE_az", "L1");
    for row in out.series.rows.iter().step_by(10) {
        println!("{:>5.2} {:>12.4e} {:>12.4e} {:>10.4e}", row.t, row.energy - out.series.energy_inf, row.de_az, row.l1);
    }
    let fit = fit_rate(&out.series, RateField::EnergyGap, (1.0, 5.0))?;
    let rep = check_dissipation_inequality(&out.series, lambda);
    println!("certified lambda = {lambda:.4}; fitted energy-gap rate = {:.4} (bound 2 lambda = {:.4})", fit.rate, 2.0 * lambda);
    println!("dissipation verdict: {:?}", rep.verdict);
    Ok(())
}
