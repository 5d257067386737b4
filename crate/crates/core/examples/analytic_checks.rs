//! Closed-form sufficient conditions next to the grid certificate.

use vfplab::infomatrix::checks::{
    check_case1_gershgorin, check_case2_schur, check_example2_interval, check_remark3, compute_lambda_u,
    EigenBoundSpec,
};
use vfplab::model::{DirectionPair, EigenRange};

fn main() -> vfplab::Result<()> {
    let dir = DirectionPair::new(1.0, 0.3);

    // Quadratic well with stiffness in [0.9, 1.2].
    let lambda_u = compute_lambda_u(&dir, 0.9, 1.2);
    println!("lambda_U = {lambda_u:.4}");
    let iv = check_example2_interval(&dir, lambda_u);
    println!("admissible interaction curvature: ({:.4}, {:.4})", iv.lo, iv.hi);

    // The Gershgorin route bounds the Hessian of W + U as a whole.
    let u = EigenRange::new(0.9, 1.2)?;
    let bounds = EigenBoundSpec {
        wxx_range: EigenRange::point(-0.12).add(&u),
        wxy_range: EigenRange::point(0.001),
        u_range: Some(u),
    };
    let c1 = check_case1_gershgorin(&dir, &bounds);
    println!("gershgorin: feasible = {} (C1 = {:.4}, C2 = {:.4})", c1.feasible, c1.c1, c1.c2);

    let c2 = check_case2_schur(0.3, 0.9, 1.2, 0.02);
    println!("schur (no mixed Hessian): feasible = {}", c2.feasible);

    // A pure difference kernel with no confinement is never certified.
    let r3 = check_remark3(&dir, 0.5);
    println!("difference kernel, U = 0: lambda <= {:.4}", r3.bound);
    Ok(())
}
