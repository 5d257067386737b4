//! Finite-difference audit of every builtin kernel and potential.

use vfplab::model::{validate_model, KernelSpec, PositionDomain, PotentialSpec, Profile};

fn main() -> vfplab::Result<()> {
    let torus = PositionDomain::torus(std::f64::consts::TAU, 1)?;
    let line = PositionDomain::line(4.0, 1)?;
    let cases = [
        (KernelSpec::Zero, PotentialSpec::Zero, torus),
        (KernelSpec::difference(0.5, 1.0), PotentialSpec::Cosine { kappa: 1.0 }, torus),
        (KernelSpec::separable(0.3, Profile::Cos), PotentialSpec::Cosine { kappa: 0.5 }, torus),
        (KernelSpec::quadratic(-0.12, 0.001), PotentialSpec::Quadratic { kappa: 0.9 }, line),
    ];
    println!("{:<12} {:<10} {:>12} {:>6}", "kernel", "potential", "max defect", "ok");
    for (k, p, dom) in cases {
        let rep = validate_model(&k, &p, &dom, 200)?;
        println!("{:<12} {:<10} {:>12.3e} {:>6}", k.name(), p.name(), rep.max_defect(), rep.passed);
    }
    Ok(())
}
