//! Certify a dissipation rate on a grid, then search for a better direction.

use vfplab::infomatrix::{certify_lambda, search_directions, XyGrid, ZGrid};
use vfplab::model::{DirectionPair, KernelSpec, PositionDomain, PotentialSpec};

fn main() -> vfplab::Result<()> {
    let kernel = KernelSpec::difference(0.05, 1.0);
    let potential = PotentialSpec::Quadratic { kappa: 0.9 };
    let grid = XyGrid::new(PositionDomain::line(6.0, 1)?, 32)?;

    let cert = certify_lambda(&kernel, &potential, DirectionPair::new(1.0, 0.3), &grid)?;
    let (x, y) = cert.argmin_point();
    println!(
        "z = (1, 0.3): lambda = {:.6} at x = {:.3}, y = {:.3}, feasible = {}",
        cert.lambda, x[0], y[0], cert.feasible
    );

    let search = search_directions(&kernel, &potential, &ZGrid::half_open(0.0, 2.0, 20), &grid)?;
    println!(
        "best of {} directions: z = ({:.2}, {:.2}), lambda = {:.6}",
        search.evaluated.len(),
        search.best.z1,
        search.best.z2,
        search.certificate.lambda
    );

    // Refining the grid can only lower the minimum.
    let fine = certify_lambda(&kernel, &potential, search.best, &grid.refine())?;
    println!("refined grid ({} points): lambda = {:.6}", fine.grid.len(), fine.lambda);
    Ok(())
}
